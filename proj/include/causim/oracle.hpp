#pragma once

#include <cstdint>
#include <vector>

#include "causim/distribution.hpp"
#include "causim/process.hpp"

namespace causim {

class LearnerTable;  // meta_trainer.hpp

// Brute-force reference implementations. Everything here favors clarity
// over speed and shares no inference code with the engine or the
// policies; it exists to mint expected values and to be obviously
// correct.
namespace oracle {

inline constexpr std::uint64_t kOracleEnumerationCap = std::uint64_t{1} << 20;

// Explicit probability per full assignment, in odometer order (last
// variable cycling fastest).
struct OutcomeTable {
  std::vector<int> radices;
  std::vector<double> prob;

  std::uint64_t size() const { return prob.size(); }
  void decode(std::uint64_t index, std::vector<int>& out) const;
  double total() const;
};

// Joint table of a process with the given interventions already applied
// (intervened factors replaced by point masses).
OutcomeTable outcome_table(const CausalProcess& process,
                           const std::vector<EvidenceItem>& interventions = {});

// Literal mutilate-then-filter counterpart of engine::query.
Distribution oracle_query(const CausalProcess& process, int target,
                          const std::vector<EvidenceItem>& evidence);
Distribution oracle_query(const CausalProcess& process,
                          const std::string& target,
                          const std::vector<EvidenceItem>& evidence);

// Joint distribution over interleaved training realizations
// (theta, a_1, abar_1, o_1, ..., a_T, abar_T, o_T) for a single-latent
// round process: the agent samples its own actions from `policy` rows
// keyed by its visible history, the expert and the environment follow
// the process mechanisms given theta. A null policy means uniform.
//
// Tuple layout in the table: index 0 is theta, then (a, abar, o) per
// round.
OutcomeTable braided_table(const CausalProcess& process,
                           const LearnerTable* policy, int horizon);

// Conditional of the expert action abar_t (1-based t) given the agent's
// visible history (a_1..a_{t-1}, o_1..o_{t-1}), marginalizing everything
// else. This is the distribution the counterfactual teaching signal
// regresses per history key.
Distribution braided_expert_conditional(const OutcomeTable& table,
                                        const CausalProcess& process,
                                        int horizon, int t,
                                        const std::vector<int>& past_actions,
                                        const std::vector<int>& past_obs);

// Conditional of o_t given (a_1..a_t, o_1..o_{t-1}), the factual signal
// target per history key.
Distribution braided_observation_conditional(
    const OutcomeTable& table, const CausalProcess& process, int horizon,
    int t, const std::vector<int>& actions, const std::vector<int>& past_obs);

// Probability of the agent's visible pre-action history under the
// braided law: actions a_1..a_{t-1} and observations o_1..o_{t-1}.
double braided_history_mass(const OutcomeTable& table,
                            const CausalProcess& process, int horizon, int t,
                            const std::vector<int>& past_actions,
                            const std::vector<int>& past_obs);

}  // namespace oracle
}  // namespace causim
