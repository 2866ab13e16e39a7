#include "causim/oracle.hpp"

#include <string>

#include "causim/meta_trainer.hpp"

namespace causim {
namespace oracle {

namespace {

std::uint64_t radix_product(const std::vector<int>& radices) {
  std::uint64_t n = 1;
  for (int r : radices) n *= static_cast<std::uint64_t>(r);
  return n;
}

void decode_index(const std::vector<int>& radices, std::uint64_t index,
                  std::vector<int>& out) {
  out.resize(radices.size());
  for (std::size_t i = radices.size(); i-- > 0;) {
    const std::uint64_t k = static_cast<std::uint64_t>(radices[i]);
    out[i] = static_cast<int>(index % k);
    index /= k;
  }
}

// A process usable by the braided system: one leading latent, then
// alternating action/observation rounds.
int braided_round_count(const CausalProcess& process) {
  const auto& vars = process.variables();
  if (vars.empty() || vars[0].role != Role::Latent) {
    throw ValidationError(
        "braided system needs a single leading latent variable");
  }
  if ((vars.size() - 1) % 2 != 0) {
    throw ValidationError("braided system needs action/observation rounds");
  }
  const int rounds = static_cast<int>((vars.size() - 1) / 2);
  for (int t = 0; t < rounds; ++t) {
    if (vars[1 + 2 * t].role != Role::Action ||
        vars[2 + 2 * t].role != Role::Observation) {
      throw ValidationError("braided system needs action/observation rounds");
    }
  }
  return rounds;
}

}  // namespace

void OutcomeTable::decode(std::uint64_t index, std::vector<int>& out) const {
  decode_index(radices, index, out);
}

double OutcomeTable::total() const {
  double s = 0.0;
  for (double p : prob) s += p;
  return s;
}

OutcomeTable outcome_table(const CausalProcess& process,
                           const std::vector<EvidenceItem>& interventions) {
  check_evidence_distinct(interventions);
  std::vector<int> do_value(process.variable_count(), -1);
  for (const EvidenceItem& e : interventions) {
    if (e.mode != Mode::Intervene) {
      throw ValidationError("outcome_table takes Intervene items only");
    }
    check_evidence_item(process, e);
    do_value[e.variable] = e.value;
  }

  OutcomeTable table;
  for (const VariableSpec& v : process.variables()) {
    table.radices.push_back(v.domain_size);
  }
  const std::uint64_t n = radix_product(table.radices);
  if (n > kOracleEnumerationCap) {
    throw CapacityError("oracle would enumerate " + std::to_string(n) +
                        " assignments (cap " +
                        std::to_string(kOracleEnumerationCap) + ")");
  }

  table.prob.resize(n);
  std::vector<int> assignment;
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    table.decode(idx, assignment);
    double p = 1.0;
    for (int v = 0; v < process.variable_count(); ++v) {
      if (do_value[v] >= 0) {
        // Mutilated factor: point mass on the intervened value.
        p *= (assignment[v] == do_value[v]) ? 1.0 : 0.0;
      } else {
        p *= process.mechanism_prob(v, assignment, assignment[v]);
      }
      if (p == 0.0) break;
    }
    table.prob[idx] = p;
  }
  return table;
}

Distribution oracle_query(const CausalProcess& process, int target,
                          const std::vector<EvidenceItem>& evidence) {
  check_evidence_distinct(evidence);
  if (target < 0 || target >= process.variable_count()) {
    throw InvalidAssignmentError("target variable id out of range");
  }
  std::vector<EvidenceItem> interventions;
  for (const EvidenceItem& e : evidence) {
    check_evidence_item(process, e);
    if (e.variable == target) {
      throw DuplicateEvidenceError("target variable '" +
                                   process.variable(target).name +
                                   "' appears in the evidence");
    }
    if (e.mode == Mode::Intervene) interventions.push_back(e);
  }

  const OutcomeTable table = outcome_table(process, interventions);
  std::vector<double> acc(
      static_cast<std::size_t>(process.variable(target).domain_size), 0.0);
  std::vector<int> assignment;
  for (std::uint64_t idx = 0; idx < table.size(); ++idx) {
    if (table.prob[idx] == 0.0) continue;
    table.decode(idx, assignment);
    bool keep = true;
    for (const EvidenceItem& e : evidence) {
      if (assignment[e.variable] != e.value) {
        keep = false;
        break;
      }
    }
    if (keep) acc[assignment[target]] += table.prob[idx];
  }
  return normalize(std::move(acc));
}

Distribution oracle_query(const CausalProcess& process,
                          const std::string& target,
                          const std::vector<EvidenceItem>& evidence) {
  return oracle_query(process, process.variable_id(target), evidence);
}

OutcomeTable braided_table(const CausalProcess& process,
                           const LearnerTable* policy, int horizon) {
  const int rounds = braided_round_count(process);
  if (horizon < 1 || horizon > rounds) {
    throw ValidationError("horizon exceeds the process round count");
  }
  const int theta_k = process.variable(0).domain_size;

  OutcomeTable table;
  table.radices.push_back(theta_k);
  for (int t = 1; t <= horizon; ++t) {
    const int a_k = process.variable(2 * t - 1).domain_size;
    const int o_k = process.variable(2 * t).domain_size;
    table.radices.push_back(a_k);
    table.radices.push_back(a_k);  // expert action, same alphabet
    table.radices.push_back(o_k);
  }
  const std::uint64_t n = radix_product(table.radices);
  if (n > kOracleEnumerationCap) {
    throw CapacityError("braided enumeration of " + std::to_string(n) +
                        " tuples exceeds cap");
  }

  table.prob.resize(n);
  std::vector<int> tuple;
  std::vector<int> assignment(process.variables().size(), 0);
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    table.decode(idx, tuple);
    const int theta = tuple[0];
    assignment[0] = theta;

    double p = process.mechanism_prob(0, assignment, theta);
    TaggedHistory visible;
    for (int t = 1; t <= horizon && p > 0.0; ++t) {
      const int a_id = 2 * t - 1;
      const int o_id = 2 * t;
      const int a = tuple[1 + 3 * (t - 1)];
      const int abar = tuple[2 + 3 * (t - 1)];
      const int o = tuple[3 + 3 * (t - 1)];

      // Agent's own action from its policy over the visible history.
      if (policy) {
        p *= policy->predict_action(visible).p[static_cast<std::size_t>(a)];
      } else {
        p *= 1.0 / static_cast<double>(process.variable(a_id).domain_size);
      }
      // Expert's counterfactual action from the process mechanism; the
      // expert sees theta and the agent's realized interaction so far.
      p *= process.mechanism_prob(a_id, assignment, abar);
      // Environment observation follows the agent's action.
      assignment[a_id] = a;
      p *= process.mechanism_prob(o_id, assignment, o);
      assignment[o_id] = o;

      visible.items.push_back({a_id, a, Mode::Intervene});
      visible.items.push_back({o_id, o, Mode::Condition});
    }
    table.prob[idx] = p;
  }
  return table;
}

namespace {

// Shared sweep: accumulates tuple mass per value of one tuple slot,
// restricted to tuples whose visible prefix matches.
std::vector<double> braided_slot_marginal(const OutcomeTable& table,
                                          int slot,
                                          const std::vector<int>& match_slots,
                                          const std::vector<int>& match_values) {
  std::vector<double> acc(static_cast<std::size_t>(table.radices[slot]), 0.0);
  std::vector<int> tuple;
  for (std::uint64_t idx = 0; idx < table.size(); ++idx) {
    if (table.prob[idx] == 0.0) continue;
    table.decode(idx, tuple);
    bool keep = true;
    for (std::size_t i = 0; i < match_slots.size(); ++i) {
      if (tuple[match_slots[i]] != match_values[i]) {
        keep = false;
        break;
      }
    }
    if (keep) acc[tuple[slot]] += table.prob[idx];
  }
  return acc;
}

void append_round_prefix(std::vector<int>& slots, std::vector<int>& values,
                         const std::vector<int>& actions,
                         const std::vector<int>& obs) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    slots.push_back(1 + 3 * static_cast<int>(i));
    values.push_back(actions[i]);
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    slots.push_back(3 + 3 * static_cast<int>(i));
    values.push_back(obs[i]);
  }
}

}  // namespace

Distribution braided_expert_conditional(const OutcomeTable& table,
                                        const CausalProcess&, int horizon,
                                        int t,
                                        const std::vector<int>& past_actions,
                                        const std::vector<int>& past_obs) {
  if (t < 1 || t > horizon ||
      past_actions.size() != static_cast<std::size_t>(t - 1) ||
      past_obs.size() != static_cast<std::size_t>(t - 1)) {
    throw ValidationError("braided conditional: bad prefix lengths");
  }
  std::vector<int> slots, values;
  append_round_prefix(slots, values, past_actions, past_obs);
  return normalize(braided_slot_marginal(table, 2 + 3 * (t - 1), slots, values));
}

Distribution braided_observation_conditional(
    const OutcomeTable& table, const CausalProcess&, int horizon, int t,
    const std::vector<int>& actions, const std::vector<int>& past_obs) {
  if (t < 1 || t > horizon ||
      actions.size() != static_cast<std::size_t>(t) ||
      past_obs.size() != static_cast<std::size_t>(t - 1)) {
    throw ValidationError("braided conditional: bad prefix lengths");
  }
  std::vector<int> slots, values;
  append_round_prefix(slots, values, actions, past_obs);
  return normalize(braided_slot_marginal(table, 3 + 3 * (t - 1), slots, values));
}

double braided_history_mass(const OutcomeTable& table, const CausalProcess&,
                            int horizon, int t,
                            const std::vector<int>& past_actions,
                            const std::vector<int>& past_obs) {
  if (t < 1 || t > horizon ||
      past_actions.size() != static_cast<std::size_t>(t - 1) ||
      past_obs.size() != static_cast<std::size_t>(t - 1)) {
    throw ValidationError("braided history mass: bad prefix lengths");
  }
  std::vector<int> slots, values;
  append_round_prefix(slots, values, past_actions, past_obs);
  std::vector<int> tuple;
  double mass = 0.0;
  for (std::uint64_t idx = 0; idx < table.size(); ++idx) {
    if (table.prob[idx] == 0.0) continue;
    table.decode(idx, tuple);
    bool keep = true;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (tuple[slots[i]] != values[i]) {
        keep = false;
        break;
      }
    }
    if (keep) mass += table.prob[idx];
  }
  return mass;
}

}  // namespace oracle
}  // namespace causim
