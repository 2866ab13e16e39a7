#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "causim/distribution.hpp"
#include "causim/policies.hpp"
#include "causim/process.hpp"

namespace causim {

// Canonical encoding of a tagged history: (variable, mode, value) per
// item. An intervened symbol and its conditioned twin encode differently,
// so they key separate table rows.
using HistoryKey = std::vector<int>;

HistoryKey encode_history(const TaggedHistory& history);
TaggedHistory decode_history(const HistoryKey& key);

// The additive-smoothing predictive that minimizes the empirical
// cross-entropy under a pseudo-count prior: (count + alpha) over
// (total + alpha * domain).
Distribution smoothed_predictive(const std::vector<std::uint64_t>& counts,
                                 double alpha);

// Tabular memory-based learner. Two count tables keyed by tagged
// histories: the action table keyed by the pre-action history (intervened
// past actions, conditioned observations), the observation table keyed by
// the history including the current intervened action.
class LearnerTable {
 public:
  LearnerTable() = default;
  LearnerTable(int action_domain, int observation_domain, double alpha);

  int action_domain() const { return action_domain_; }
  int observation_domain() const { return observation_domain_; }
  double alpha() const { return alpha_; }

  Distribution predict_action(const TaggedHistory& history) const;
  Distribution predict_observation(const TaggedHistory& history) const;

  void record_action_target(const TaggedHistory& history, int expert_action);
  void record_observation(const TaggedHistory& history, int observation);

  // Exact count merge; used to combine per-worker tables.
  void merge(const LearnerTable& other);

  const std::map<HistoryKey, std::vector<std::uint64_t>>& action_counts() const {
    return action_counts_;
  }
  const std::map<HistoryKey, std::vector<std::uint64_t>>& observation_counts()
      const {
    return observation_counts_;
  }

  // Canonical text format (sorted keys, names from `process`); loads
  // back bit-identically.
  void save(std::ostream& out, const CausalProcess& process) const;
  static LearnerTable load(std::istream& in, const CausalProcess& process);

 private:
  int action_domain_ = 0;
  int observation_domain_ = 0;
  double alpha_ = 1.0;
  std::map<HistoryKey, std::vector<std::uint64_t>> action_counts_;
  std::map<HistoryKey, std::vector<std::uint64_t>> observation_counts_;
};

// One training realization: the latent draw, the agent's own actions,
// the expert's counterfactual actions, the observations, and the two
// log-loss streams. Expert actions influence only the losses, never the
// continuation.
struct BraidedEpisode {
  int theta = 0;
  std::vector<int> agent_actions;
  std::vector<int> expert_actions;
  std::vector<int> observations;
  std::vector<double> action_losses;  // -log P(expert action | pre-action key)
  std::vector<double> obs_losses;     // -log P(observation | post-action key)
};

// Probability of a realization under the interleaved law: the latent
// prior times, per round, the agent's own action probability, the expert
// mechanism, and the observation mechanism. A null learner means the
// frozen uniform policy.
double braided_probability(const CausalProcess& process,
                           const LearnerTable* learner,
                           const BraidedEpisode& episode);

// Draws one realization; recorded losses are scored by the generating
// policy (uniform when null). The expert draw uses a random stream
// separate from the agent/environment stream, so dropping the expert
// leaves the realization bit-identical.
BraidedEpisode generate_braided_episode(const CausalProcess& process,
                                        const LearnerTable* policy,
                                        int horizon, std::uint64_t seed,
                                        bool with_expert = true);

// Replays an episode into the tables: expert actions keyed by the
// pre-action history, observations keyed by the history including the
// current intervened action.
void record_episode(LearnerTable& table, const CausalProcess& process,
                    const BraidedEpisode& episode);

enum class TrainingVariant {
  Frozen,      // uniform behavior policy; episodes may run in parallel
  Interleaved  // behavior follows the current table; sequential
};

// Meta-training loop: per round the learner predicts the expert action,
// samples its own action from that prediction (or from the frozen uniform
// policy), records the expert's revealed action keyed by the pre-action
// history, appends its own action with an Intervene tag, then records and
// appends the observation with a Condition tag. The learner's own action
// never enters any count as a target.
LearnerTable run_training(const CausalProcess& process, int horizon,
                          std::uint64_t episodes, double alpha,
                          std::uint64_t root_seed, TrainingVariant variant);

struct LossReport {
  std::vector<double> mean_action_loss;  // per round
  std::vector<double> mean_obs_loss;     // per round
};

// Mean held-out log-losses of `learner` on the given episodes.
LossReport loss_report(const CausalProcess& process, const LearnerTable& learner,
                       const std::vector<BraidedEpisode>& episodes);

// Verifies that every predictive row equals the smoothed count estimator,
// i.e. the cross-entropy minimizer under the pseudo-count prior.
bool minimizer_check(const LearnerTable& learner);

// Round layout of a single-latent interaction process; shared by the
// trainer and the simulator's table-driven policy.
struct RoundLayout {
  int action_id(int t) const { return 2 * t - 1; }  // t is 1-based
  int observation_id(int t) const { return 2 * t; }
  int rounds = 0;
};
RoundLayout single_latent_layout(const CausalProcess& process);

// Display form of a tagged history, e.g. "do(A1=1) O1=0"; "()" when
// empty. Parsed back by history_from_string.
std::string history_to_string(const TaggedHistory& history,
                              const CausalProcess& process);
TaggedHistory history_from_string(const std::string& text,
                                  const CausalProcess& process);

// Per-key comparison of a trained table against the exact conditionals
// with past actions intervened (the convergence target) and with past
// actions conditioned (the deluded table).
struct TableEvaluationRow {
  bool action_table = true;
  TaggedHistory key;
  std::uint64_t samples = 0;
  Distribution learned;
  Distribution intervened_target;
  Distribution conditioned_target;
  double tv_to_intervened = 0.0;
  double tv_to_conditioned = 0.0;
};

std::vector<TableEvaluationRow> evaluate_against_targets(
    const CausalProcess& process, const LearnerTable& learner);

}  // namespace causim
