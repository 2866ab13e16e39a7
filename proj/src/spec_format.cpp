#include "causim/spec_format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace causim {

namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    tokens.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return tokens;
}

int parse_int(const Token& t, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(t.text, &pos);
    if (pos != t.text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, t.column,
                     std::string("expected ") + what + ", got '" + t.text + "'");
  }
}

double parse_prob(const Token& t, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(t.text, &pos);
    if (pos != t.text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, t.column,
                     "expected a probability, got '" + t.text + "'");
  }
}

struct PendingMechanism {
  int declared_line = 0;
  // parent assignment (row index) -> (probs, line where declared)
  std::map<std::size_t, std::vector<double>> rows;
};

}  // namespace

CausalProcess parse_process_spec(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  std::string process_name = "process";
  std::vector<VariableSpec> variables;
  std::map<std::string, int> ids;
  std::vector<std::vector<int>> parents_of;
  std::vector<PendingMechanism> pending;
  int current = -1;  // variable whose mechanism block is open

  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<Token> tokens = tokenize(line);
    if (tokens.empty()) continue;
    const Token& head = tokens[0];

    if (head.text == "process") {
      if (tokens.size() != 2) {
        throw ParseError(line_no, head.column, "expected: process <name>");
      }
      process_name = tokens[1].text;
    } else if (head.text == "variable") {
      if (current >= 0) {
        throw ParseError(line_no, head.column,
                         "variable declarations must precede mechanisms");
      }
      if (tokens.size() < 4) {
        throw ParseError(line_no, head.column,
                         "expected: variable <name> <role> <domain-size>");
      }
      const std::string& name = tokens[1].text;
      if (ids.count(name)) {
        throw ValidationError("variable '" + name + "' declared twice (line " +
                              std::to_string(line_no) + ")");
      }
      Role role;
      try {
        role = role_from_name(tokens[2].text);
      } catch (const ValidationError&) {
        throw ValidationError("variable '" + name + "': unknown role '" +
                              tokens[2].text + "' (line " +
                              std::to_string(line_no) + ")");
      }
      const int domain = parse_int(tokens[3], line_no, "a domain size");
      if (domain < 1) {
        throw ValidationError("variable '" + name +
                              "': domain size must be positive (line " +
                              std::to_string(line_no) + ")");
      }

      std::vector<int> parents;
      if (tokens.size() > 4) {
        if (tokens[4].text != ":") {
          throw ParseError(line_no, tokens[4].column,
                           "expected ':' before the parent list");
        }
        for (std::size_t i = 5; i < tokens.size(); ++i) {
          const auto it = ids.find(tokens[i].text);
          if (it == ids.end()) {
            throw ValidationError(
                "variable '" + name + "': parent '" + tokens[i].text +
                "' is not declared yet; parents must precede children (line " +
                std::to_string(line_no) + ")");
          }
          parents.push_back(it->second);
        }
      }

      const int id = static_cast<int>(variables.size());
      ids[name] = id;
      variables.push_back({id, name, role, domain});
      parents_of.push_back(std::move(parents));
      pending.emplace_back();
    } else if (head.text == "mechanism") {
      if (tokens.size() != 2) {
        throw ParseError(line_no, head.column, "expected: mechanism <name>");
      }
      const auto it = ids.find(tokens[1].text);
      if (it == ids.end()) {
        throw ValidationError("mechanism for undeclared variable '" +
                              tokens[1].text + "' (line " +
                              std::to_string(line_no) + ")");
      }
      current = it->second;
      if (pending[static_cast<std::size_t>(current)].declared_line) {
        throw ValidationError("variable '" + tokens[1].text +
                              "' has two mechanism blocks (line " +
                              std::to_string(line_no) + ")");
      }
      pending[static_cast<std::size_t>(current)].declared_line = line_no;
    } else if (head.text == "row") {
      if (current < 0) {
        throw ParseError(line_no, head.column,
                         "row outside of a mechanism block");
      }
      const VariableSpec& v = variables[static_cast<std::size_t>(current)];
      const std::vector<int>& parents = parents_of[static_cast<std::size_t>(current)];

      std::size_t i = 1;
      std::vector<int> parent_values;
      while (i < tokens.size() && tokens[i].text != ":") {
        parent_values.push_back(parse_int(tokens[i], line_no, "a symbol"));
        ++i;
      }
      if (i == tokens.size()) {
        throw ParseError(line_no, head.column,
                         "expected ':' between symbols and probabilities");
      }
      ++i;  // skip ':'
      if (parent_values.size() != parents.size()) {
        throw ValidationError(
            "variable '" + v.name + "': row lists " +
            std::to_string(parent_values.size()) + " parent symbols, expected " +
            std::to_string(parents.size()) + " (line " +
            std::to_string(line_no) + ")");
      }
      std::size_t row_index = 0;
      for (std::size_t k = 0; k < parents.size(); ++k) {
        const VariableSpec& p =
            variables[static_cast<std::size_t>(parents[k])];
        if (parent_values[k] < 0 || parent_values[k] >= p.domain_size) {
          throw ValidationError("variable '" + v.name + "': parent symbol " +
                                std::to_string(parent_values[k]) +
                                " out of range for '" + p.name + "' (line " +
                                std::to_string(line_no) + ")");
        }
        row_index = row_index * static_cast<std::size_t>(p.domain_size) +
                    static_cast<std::size_t>(parent_values[k]);
      }

      std::vector<double> probs;
      for (; i < tokens.size(); ++i) probs.push_back(parse_prob(tokens[i], line_no));
      if (probs.size() != static_cast<std::size_t>(v.domain_size)) {
        throw ValidationError("variable '" + v.name + "': row has " +
                              std::to_string(probs.size()) +
                              " probabilities, expected " +
                              std::to_string(v.domain_size) + " (line " +
                              std::to_string(line_no) + ")");
      }
      double sum = 0.0;
      for (double q : probs) {
        if (q < 0.0) {
          throw ValidationError("variable '" + v.name +
                                "': negative probability (line " +
                                std::to_string(line_no) + ")");
        }
        sum += q;
      }
      if (std::abs(sum - 1.0) > kProbTolerance) {
        throw ValidationError("variable '" + v.name + "': row sums to " +
                              std::to_string(sum) + ", expected 1 (line " +
                              std::to_string(line_no) + ")");
      }
      auto& rows = pending[static_cast<std::size_t>(current)].rows;
      if (rows.count(row_index)) {
        throw ValidationError("variable '" + v.name +
                              "': duplicate row for the same parent symbols "
                              "(line " +
                              std::to_string(line_no) + ")");
      }
      rows[row_index] = std::move(probs);
    } else {
      throw ParseError(line_no, head.column,
                       "unknown directive '" + head.text + "'");
    }
  }

  if (variables.empty()) {
    throw ValidationError("process declares no variables");
  }

  std::vector<Mechanism> mechanisms;
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const PendingMechanism& pm = pending[v];
    if (!pm.declared_line) {
      throw ValidationError("variable '" + variables[v].name +
                            "' has no mechanism block");
    }
    std::size_t row_count = 1;
    for (int p : parents_of[v]) {
      row_count *= static_cast<std::size_t>(
          variables[static_cast<std::size_t>(p)].domain_size);
    }
    if (pm.rows.size() != row_count) {
      throw ValidationError("variable '" + variables[v].name + "' covers " +
                            std::to_string(pm.rows.size()) + " of " +
                            std::to_string(row_count) + " parent assignments");
    }
    Mechanism m;
    m.variable = static_cast<int>(v);
    m.parents = parents_of[v];
    for (const auto& [index, probs] : pm.rows) {
      (void)index;  // std::map iterates rows in odometer order
      m.table.insert(m.table.end(), probs.begin(), probs.end());
    }
    mechanisms.push_back(std::move(m));
  }

  return CausalProcess(process_name, std::move(variables),
                       std::move(mechanisms));
}

std::string serialize_process_spec(const CausalProcess& process) {
  std::ostringstream out;
  out << "process " << process.name() << '\n';
  for (const VariableSpec& v : process.variables()) {
    out << "variable " << v.name << ' ' << role_name(v.role) << ' '
        << v.domain_size;
    const Mechanism& m = process.mechanism(v.id);
    if (!m.parents.empty()) {
      out << " :";
      for (int p : m.parents) out << ' ' << process.variable(p).name;
    }
    out << '\n';
  }
  char buf[64];
  for (const VariableSpec& v : process.variables()) {
    const Mechanism& m = process.mechanism(v.id);
    out << "mechanism " << v.name << '\n';
    const std::size_t rows = m.row_count(process.variables());
    const std::size_t k = static_cast<std::size_t>(v.domain_size);
    std::vector<int> parent_values(m.parents.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
      out << "row";
      for (int pv : parent_values) out << ' ' << pv;
      out << " :";
      for (std::size_t c = 0; c < k; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", m.table[r * k + c]);
        out << ' ' << buf;
      }
      out << '\n';
      // odometer over parent symbols, last parent fastest
      for (std::size_t i = parent_values.size(); i-- > 0;) {
        const int domain =
            process.variable(m.parents[i]).domain_size;
        if (++parent_values[i] < domain) break;
        parent_values[i] = 0;
      }
    }
  }
  return out.str();
}

}  // namespace causim
