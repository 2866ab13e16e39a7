#include "causim/engine.hpp"

#include <algorithm>
#include <string>

namespace causim {

double joint_probability(const CausalProcess& process,
                         std::span<const int> assignment) {
  process.check_assignment(assignment);
  double p = 1.0;
  for (int v = 0; v < process.variable_count(); ++v) {
    p *= process.mechanism_prob(v, assignment, assignment[v]);
    if (p == 0.0) break;
  }
  return p;
}

CausalProcess apply_interventions(
    const CausalProcess& process,
    const std::vector<EvidenceItem>& interventions) {
  check_evidence_distinct(interventions);
  std::vector<Mechanism> mechanisms = process.mechanisms();
  for (const EvidenceItem& e : interventions) {
    if (e.mode != Mode::Intervene) {
      throw ValidationError("apply_interventions expects Intervene items");
    }
    check_evidence_item(process, e);
    const int k = process.variable(e.variable).domain_size;
    Mechanism& m = mechanisms[e.variable];
    m.parents.clear();
    m.table.assign(static_cast<std::size_t>(k), 0.0);
    m.table[static_cast<std::size_t>(e.value)] = 1.0;
  }
  return CausalProcess(process.name(), process.variables(),
                       std::move(mechanisms));
}

namespace {

// Enumeration kernel. Free variables are swept in odometer order; the
// work is split into fixed blocks so that partial sums can be combined
// in block order, making the result independent of the thread count.
struct EnumerationPlan {
  std::vector<int> fixed_values;   // per variable, -1 when free
  std::vector<int> free_vars;      // ids of free variables
  std::uint64_t space = 1;         // product of free domains
};

EnumerationPlan make_plan(const CausalProcess& process,
                          const std::vector<EvidenceItem>& evidence) {
  EnumerationPlan plan;
  plan.fixed_values.assign(process.variable_count(), -1);
  for (const EvidenceItem& e : evidence) plan.fixed_values[e.variable] = e.value;
  for (int v = 0; v < process.variable_count(); ++v) {
    if (plan.fixed_values[v] < 0) {
      plan.free_vars.push_back(v);
      plan.space *= static_cast<std::uint64_t>(process.variable(v).domain_size);
    }
  }
  return plan;
}

void decode_free(const CausalProcess& process, const EnumerationPlan& plan,
                 std::uint64_t index, std::vector<int>& assignment) {
  for (std::size_t i = plan.free_vars.size(); i-- > 0;) {
    const int v = plan.free_vars[i];
    const std::uint64_t k =
        static_cast<std::uint64_t>(process.variable(v).domain_size);
    assignment[v] = static_cast<int>(index % k);
    index /= k;
  }
}

}  // namespace

Distribution query(const CausalProcess& process, int target,
                   const std::vector<EvidenceItem>& evidence) {
  if (target < 0 || target >= process.variable_count()) {
    throw InvalidAssignmentError("target variable id out of range");
  }
  check_evidence_distinct(evidence);
  for (const EvidenceItem& e : evidence) {
    check_evidence_item(process, e);
    if (e.variable == target) {
      throw DuplicateEvidenceError("target variable '" +
                                   process.variable(target).name +
                                   "' appears in the evidence");
    }
  }

  std::vector<EvidenceItem> interventions;
  for (const EvidenceItem& e : evidence) {
    if (e.mode == Mode::Intervene) interventions.push_back(e);
  }
  const CausalProcess mutilated =
      interventions.empty() ? process
                            : apply_interventions(process, interventions);

  // Both modes pin the variable's value in the sweep: interventions hold
  // by construction of the mutilated process, conditions restrict the sum.
  const EnumerationPlan plan = make_plan(mutilated, evidence);
  if (plan.space > kEngineEnumerationCap) {
    throw CapacityError("query would enumerate " + std::to_string(plan.space) +
                        " assignments (cap " +
                        std::to_string(kEngineEnumerationCap) + ")");
  }

  const int k = mutilated.variable(target).domain_size;
  const std::uint64_t block_size = 1 << 14;
  const std::uint64_t n_blocks = (plan.space + block_size - 1) / block_size;
  std::vector<double> block_acc(n_blocks * static_cast<std::uint64_t>(k), 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
    std::vector<int> assignment(plan.fixed_values);
    double* acc = &block_acc[static_cast<std::uint64_t>(b) *
                             static_cast<std::uint64_t>(k)];
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * block_size;
    const std::uint64_t hi = std::min(plan.space, lo + block_size);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      decode_free(mutilated, plan, idx, assignment);
      double p = 1.0;
      for (int v = 0; v < mutilated.variable_count(); ++v) {
        p *= mutilated.mechanism_prob(v, assignment, assignment[v]);
        if (p == 0.0) break;
      }
      acc[assignment[target]] += p;
    }
  }

  std::vector<double> totals(static_cast<std::size_t>(k), 0.0);
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    for (int c = 0; c < k; ++c) {
      totals[static_cast<std::size_t>(c)] +=
          block_acc[b * static_cast<std::uint64_t>(k) +
                    static_cast<std::uint64_t>(c)];
    }
  }
  return normalize(std::move(totals));
}

Distribution query(const CausalProcess& process, const std::string& target,
                   const std::vector<EvidenceItem>& evidence) {
  return query(process, process.variable_id(target), evidence);
}

}  // namespace causim
