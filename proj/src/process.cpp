#include "causim/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace causim {

const char* role_name(Role r) {
  switch (r) {
    case Role::Latent: return "latent";
    case Role::Action: return "action";
    case Role::Observation: return "observation";
    case Role::Goal: return "goal";
  }
  return "?";
}

Role role_from_name(const std::string& s) {
  if (s == "latent") return Role::Latent;
  if (s == "action") return Role::Action;
  if (s == "observation") return Role::Observation;
  if (s == "goal") return Role::Goal;
  throw ValidationError("unknown role '" + s +
                        "' (expected latent, action, observation or goal)");
}

std::size_t Mechanism::row_count(const std::vector<VariableSpec>& vars) const {
  std::size_t rows = 1;
  for (int p : parents) rows *= static_cast<std::size_t>(vars[p].domain_size);
  return rows;
}

std::size_t Mechanism::row_index(std::span<const int> assignment,
                                 const std::vector<VariableSpec>& vars) const {
  std::size_t idx = 0;
  for (int p : parents) {
    idx = idx * static_cast<std::size_t>(vars[p].domain_size) +
          static_cast<std::size_t>(assignment[p]);
  }
  return idx;
}

CausalProcess::CausalProcess(std::string name,
                             std::vector<VariableSpec> variables,
                             std::vector<Mechanism> mechanisms)
    : name_(std::move(name)),
      variables_(std::move(variables)),
      mechanisms_(std::move(mechanisms)) {
  validate();
}

void CausalProcess::validate() const {
  if (variables_.size() != mechanisms_.size()) {
    throw ValidationError("process '" + name_ +
                          "': one mechanism per variable required");
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const VariableSpec& v = variables_[i];
    if (v.id != static_cast<int>(i)) {
      throw ValidationError("process '" + name_ +
                            "': variable ids must be consecutive from 0");
    }
    if (v.domain_size < 1) {
      throw ValidationError("variable '" + v.name +
                            "': domain size must be positive");
    }
    if (v.name.empty()) {
      throw ValidationError("process '" + name_ + "': unnamed variable");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (variables_[j].name == v.name) {
        throw ValidationError("duplicate variable name '" + v.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < mechanisms_.size(); ++i) {
    const Mechanism& m = mechanisms_[i];
    const VariableSpec& v = variables_[i];
    if (m.variable != v.id) {
      throw ValidationError("mechanism order does not match variable order");
    }
    for (int p : m.parents) {
      if (p < 0 || p >= m.variable) {
        throw ValidationError("variable '" + v.name +
                              "': every parent must be declared earlier");
      }
    }
    const std::size_t rows = m.row_count(variables_);
    const std::size_t k = static_cast<std::size_t>(v.domain_size);
    if (m.table.size() != rows * k) {
      throw ValidationError("variable '" + v.name +
                            "': table must cover all parent assignments");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        double q = m.table[r * k + c];
        if (q < 0.0 || !std::isfinite(q)) {
          throw ValidationError("variable '" + v.name +
                                "': negative or non-finite probability");
        }
        sum += q;
      }
      if (std::abs(sum - 1.0) > kProbTolerance) {
        throw ValidationError("variable '" + v.name + "': row " +
                              std::to_string(r) + " sums to " +
                              std::to_string(sum) + ", expected 1");
      }
    }
  }
}

int CausalProcess::variable_id(const std::string& name) const {
  for (const VariableSpec& v : variables_) {
    if (v.name == name) return v.id;
  }
  std::ostringstream oss;
  oss << "unknown variable '" << name << "' (valid:";
  for (const VariableSpec& v : variables_) oss << ' ' << v.name;
  oss << ')';
  throw ValidationError(oss.str());
}

bool CausalProcess::has_variable(const std::string& name) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const VariableSpec& v) { return v.name == name; });
}

double CausalProcess::mechanism_prob(int id, std::span<const int> assignment,
                                     int value) const {
  const Mechanism& m = mechanisms_[id];
  const std::size_t k = static_cast<std::size_t>(variables_[id].domain_size);
  const std::size_t row = m.row_index(assignment, variables_);
  return m.table[row * k + static_cast<std::size_t>(value)];
}

Distribution CausalProcess::mechanism_row(
    int id, std::span<const int> assignment) const {
  const Mechanism& m = mechanisms_[id];
  const std::size_t k = static_cast<std::size_t>(variables_[id].domain_size);
  const std::size_t row = m.row_index(assignment, variables_);
  std::vector<double> p(m.table.begin() + row * k,
                        m.table.begin() + (row + 1) * k);
  return Distribution(std::move(p));
}

std::uint64_t CausalProcess::joint_size() const {
  std::uint64_t n = 1;
  for (const VariableSpec& v : variables_) {
    n *= static_cast<std::uint64_t>(v.domain_size);
  }
  return n;
}

void CausalProcess::check_assignment(std::span<const int> assignment) const {
  if (assignment.size() != variables_.size()) {
    throw InvalidAssignmentError(
        "assignment has " + std::to_string(assignment.size()) +
        " symbols, process has " + std::to_string(variables_.size()) +
        " variables");
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= variables_[i].domain_size) {
      throw InvalidAssignmentError("symbol " + std::to_string(assignment[i]) +
                                   " out of range for variable '" +
                                   variables_[i].name + "'");
    }
  }
}

void check_evidence_item(const CausalProcess& process, const EvidenceItem& e) {
  if (e.variable < 0 || e.variable >= process.variable_count()) {
    throw InvalidAssignmentError("evidence variable id " +
                                 std::to_string(e.variable) + " out of range");
  }
  const VariableSpec& v = process.variable(e.variable);
  if (e.value < 0 || e.value >= v.domain_size) {
    throw InvalidAssignmentError("symbol " + std::to_string(e.value) +
                                 " out of range for variable '" + v.name +
                                 "'");
  }
}

void check_evidence_distinct(const std::vector<EvidenceItem>& evidence) {
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    for (std::size_t j = i + 1; j < evidence.size(); ++j) {
      if (evidence[i].variable == evidence[j].variable) {
        throw DuplicateEvidenceError(
            "variable id " + std::to_string(evidence[i].variable) +
            " appears more than once in the evidence");
      }
    }
  }
}

}  // namespace causim
