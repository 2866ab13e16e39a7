#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causim/meta_trainer.hpp"
#include "causim/policies.hpp"
#include "causim/process.hpp"

namespace causim {

enum class PolicyKind { Conditional, Interventional, Learned };

const char* policy_kind_name(PolicyKind k);
PolicyKind policy_kind_from_name(const std::string& s);

struct EpisodeStep {
  int action = 0;
  int observation = 0;
  double reward = 0.0;  // observation symbol 1 maps to +1, symbol 0 to -1
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::Interventional;
  std::vector<int> theta;  // realized latents, hidden from the policy
  std::vector<EpisodeStep> steps;
  bool aborted = false;  // the policy's history hit probability zero
};

struct ExperimentSummary {
  PolicyKind policy = PolicyKind::Interventional;
  int horizon = 0;
  std::uint64_t episodes = 0;
  std::uint64_t aborted = 0;
  double mean_reward_per_step = 0.0;
  double se_mean_reward = 0.0;
  double final_best_arm_rate = 0.0;  // final action equals the first latent
  double se_final_best_arm_rate = 0.0;
  double repeat_rate = 0.0;  // fraction of steps t>1 with a_t == a_{t-1}
  double se_repeat_rate = 0.0;
};

// Plays `horizon` action/observation rounds: nature samples the latents
// (hidden) and observations from the true mechanisms, the policy chooses
// the actions. Deterministic given the seed. A Learned policy requires a
// table trained on the same variable layout.
EpisodeRecord run_episode(const CausalProcess& process, PolicyKind kind,
                          const LearnerTable* learned, int horizon,
                          std::uint64_t seed);

// Independent episodes with per-index derived seeds; safe to run with
// any worker count, results depend only on the root seed.
std::vector<EpisodeRecord> run_episode_batch(const CausalProcess& process,
                                             PolicyKind kind,
                                             const LearnerTable* learned,
                                             int horizon, std::uint64_t episodes,
                                             std::uint64_t root_seed);

ExperimentSummary summarize(const std::vector<EpisodeRecord>& records,
                            int horizon);

ExperimentSummary run_experiment(const CausalProcess& process, PolicyKind kind,
                                 const LearnerTable* learned, int horizon,
                                 std::uint64_t episodes,
                                 std::uint64_t root_seed);

// One row of the offline-imitation comparison: the next-action table
// fitted purely by conditioning on expert demonstrations, against the
// conditioned and the intervened ground truth at the same history.
struct OfflineKeyRow {
  std::vector<int> past_actions;
  std::vector<int> past_obs;
  std::uint64_t key_count = 0;
  Distribution fitted;
  Distribution conditioned_target;
  Distribution intervened_target;
  double tv_fitted_conditioned = 0.0;
  double tv_fitted_intervened = 0.0;
  double se_tv_fitted_intervened = 0.0;  // delta-method standard error
};

struct OfflineReport {
  std::uint64_t trajectories = 0;
  int horizon = 0;
  std::vector<OfflineKeyRow> rows;  // every history reachable at t <= horizon
  double deployed_repeat_rate = 0.0;  // autoregressive rollout of the fit
  std::uint64_t deploy_episodes = 0;
};

// Fits a purely conditional tabular next-action model on expert
// demonstrations (latent parameter hidden per trajectory), deploys it
// autoregressively, and reports per-history total-variation gaps to both
// targets.
OfflineReport offline_demo(const CausalProcess& process, int horizon,
                           std::uint64_t trajectories, std::uint64_t root_seed,
                           std::uint64_t deploy_episodes = 2000);

}  // namespace causim
