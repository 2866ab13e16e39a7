#include "causim/simulator.hpp"

#include <atomic>
#include <cmath>

#include "causim/engine.hpp"
#include "causim/rng.hpp"
#include "causim/stats.hpp"

namespace causim {

const char* policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Conditional: return "conditional";
    case PolicyKind::Interventional: return "interventional";
    case PolicyKind::Learned: return "learned";
  }
  return "?";
}

PolicyKind policy_kind_from_name(const std::string& s) {
  if (s == "conditional") return PolicyKind::Conditional;
  if (s == "interventional") return PolicyKind::Interventional;
  if (s == "learned") return PolicyKind::Learned;
  throw ValidationError(
      "unknown policy '" + s +
      "' (valid: conditional interventional learned)");
}

namespace {

double reward_of(const CausalProcess& process, int obs_var, int symbol) {
  if (process.variable(obs_var).domain_size == 2) {
    return symbol == 1 ? 1.0 : -1.0;
  }
  return static_cast<double>(symbol);
}

// Next-action provider over the visible (theta-free) history.
class RolloutPolicy {
 public:
  RolloutPolicy(const CausalProcess& process, PolicyKind kind,
                const LearnerTable* learned)
      : kind_(kind), learned_(learned), belief_(process) {
    if (kind == PolicyKind::Learned && learned == nullptr) {
      throw ValidationError("learned policy needs a table");
    }
  }

  Distribution action_distribution(int var) {
    if (kind_ == PolicyKind::Learned) return learned_->predict_action(history_);
    return belief_.predictive(var);
  }

  void commit_action(int var, int value) {
    const Mode mode =
        kind_ == PolicyKind::Conditional ? Mode::Condition : Mode::Intervene;
    if (kind_ == PolicyKind::Learned) {
      history_.push(var, value, Mode::Intervene);
    } else {
      belief_.apply({var, value, mode});
    }
  }

  void observe(int var, int value) {
    if (kind_ == PolicyKind::Learned) {
      history_.push(var, value, Mode::Condition);
    } else {
      belief_.apply({var, value, Mode::Condition});
    }
  }

 private:
  PolicyKind kind_;
  const LearnerTable* learned_;
  BeliefState belief_;
  TaggedHistory history_;
};

}  // namespace

EpisodeRecord run_episode(const CausalProcess& process, PolicyKind kind,
                          const LearnerTable* learned, int horizon,
                          std::uint64_t seed) {
  if (horizon < 0) throw ValidationError("horizon must be non-negative");
  int available_actions = 0;
  for (const VariableSpec& v : process.variables()) {
    if (v.role == Role::Action) ++available_actions;
  }
  if (horizon > available_actions) {
    throw ValidationError("horizon " + std::to_string(horizon) +
                          " exceeds the process's " +
                          std::to_string(available_actions) + " rounds");
  }

  RandomStream nature(derive_seed(seed, 0));
  RandomStream actor(derive_seed(seed, 1));

  EpisodeRecord record;
  record.seed = seed;
  record.policy = kind;

  RolloutPolicy policy(process, kind, learned);
  std::vector<int> assignment(process.variables().size(), 0);
  int actions_played = 0;
  int pending_action = -1;

  for (int v = 0; v < process.variable_count(); ++v) {
    const Role role = process.variable(v).role;
    if (role == Role::Action) {
      if (actions_played == horizon) break;
      const Distribution d = policy.action_distribution(v);
      const int a = actor.sample(d);
      assignment[static_cast<std::size_t>(v)] = a;
      policy.commit_action(v, a);
      pending_action = a;
      ++actions_played;
    } else if (role == Role::Observation) {
      if (actions_played == 0 && horizon == 0) break;
      const int o = nature.sample(process.mechanism_row(v, assignment));
      assignment[static_cast<std::size_t>(v)] = o;
      record.steps.push_back(
          {pending_action, o, reward_of(process, v, o)});
      try {
        policy.observe(v, o);
      } catch (const ZeroProbabilityError&) {
        // The deluded history assigns no mass to what actually happened.
        record.aborted = true;
        break;
      }
      if (actions_played == horizon) break;
    } else {
      // Latent (or goal) move by nature, hidden from the policy.
      const int x = nature.sample(process.mechanism_row(v, assignment));
      assignment[static_cast<std::size_t>(v)] = x;
      if (role == Role::Latent) record.theta.push_back(x);
    }
  }
  return record;
}

std::vector<EpisodeRecord> run_episode_batch(const CausalProcess& process,
                                             PolicyKind kind,
                                             const LearnerTable* learned,
                                             int horizon,
                                             std::uint64_t episodes,
                                             std::uint64_t root_seed) {
  std::vector<EpisodeRecord> records(episodes);
  // Exceptions cannot unwind out of the parallel region; capture the
  // first one and rethrow afterwards.
  std::atomic<bool> failed{false};
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(episodes); ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      records[static_cast<std::size_t>(i)] =
          run_episode(process, kind, learned, horizon,
                      derive_seed(root_seed, static_cast<std::uint64_t>(i)));
    } catch (...) {
#pragma omp critical
      {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  }
  if (failed.load()) std::rethrow_exception(error);
  return records;
}

ExperimentSummary summarize(const std::vector<EpisodeRecord>& records,
                            int horizon) {
  ExperimentSummary summary;
  summary.horizon = horizon;
  summary.episodes = records.size();
  if (!records.empty()) summary.policy = records.front().policy;

  RunningStat reward, best_arm, repeat;
  for (const EpisodeRecord& r : records) {
    if (r.aborted) {
      ++summary.aborted;
      continue;
    }
    if (r.steps.empty()) continue;
    double total = 0.0;
    for (const EpisodeStep& s : r.steps) total += s.reward;
    reward.add(total / static_cast<double>(r.steps.size()));
    if (!r.theta.empty()) {
      best_arm.add(r.steps.back().action == r.theta.front() ? 1.0 : 0.0);
    }
    if (r.steps.size() >= 2) {
      int repeats = 0;
      for (std::size_t t = 1; t < r.steps.size(); ++t) {
        if (r.steps[t].action == r.steps[t - 1].action) ++repeats;
      }
      repeat.add(static_cast<double>(repeats) /
                 static_cast<double>(r.steps.size() - 1));
    }
  }
  summary.mean_reward_per_step = reward.mean();
  summary.se_mean_reward = reward.standard_error();
  summary.final_best_arm_rate = best_arm.mean();
  summary.se_final_best_arm_rate = best_arm.standard_error();
  summary.repeat_rate = repeat.mean();
  summary.se_repeat_rate = repeat.standard_error();
  return summary;
}

ExperimentSummary run_experiment(const CausalProcess& process, PolicyKind kind,
                                 const LearnerTable* learned, int horizon,
                                 std::uint64_t episodes,
                                 std::uint64_t root_seed) {
  if (episodes < 1) throw ValidationError("episode count must be at least 1");
  return summarize(
      run_episode_batch(process, kind, learned, horizon, episodes, root_seed),
      horizon);
}

namespace {

TaggedHistory conditioned_history(const RoundLayout& layout,
                                  const std::vector<int>& actions,
                                  const std::vector<int>& obs) {
  TaggedHistory h;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    h.push(layout.action_id(t), actions[i], Mode::Condition);
    if (i < obs.size()) h.push(layout.observation_id(t), obs[i], Mode::Condition);
  }
  return h;
}

// Delta-method standard error of the total-variation distance between an
// empirical distribution (from n samples) and a fixed target.
double tv_standard_error(const Distribution& fitted, const Distribution& target,
                         std::uint64_t n) {
  if (n == 0) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    const double sign = fitted.p[i] >= target.p[i] ? 1.0 : -1.0;
    m += sign * fitted.p[i];
  }
  const double var = (1.0 - m * m) / (4.0 * static_cast<double>(n));
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

OfflineReport offline_demo(const CausalProcess& process, int horizon,
                           std::uint64_t trajectories, std::uint64_t root_seed,
                           std::uint64_t deploy_episodes) {
  const RoundLayout layout = single_latent_layout(process);
  if (horizon < 1 || horizon > layout.rounds) {
    throw ValidationError("horizon exceeds the process round count");
  }
  if (trajectories < 1) {
    throw ValidationError("dataset needs at least one trajectory");
  }
  const int action_domain = process.variable(layout.action_id(1)).domain_size;
  const int obs_domain = process.variable(layout.observation_id(1)).domain_size;

  // Expert demonstrations: the latent is drawn per trajectory and stays
  // hidden in the dataset; the fitted model conditions on everything.
  LearnerTable fitted(action_domain, obs_domain, 1.0);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
#pragma omp parallel
  {
    LearnerTable local(action_domain, obs_domain, 1.0);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(trajectories); ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        RandomStream rng(derive_seed(root_seed, static_cast<std::uint64_t>(i)));
        std::vector<int> assignment(process.variables().size(), 0);
        const int theta = rng.sample(process.mechanism_row(0, assignment));
        assignment[0] = theta;
        std::vector<int> actions, obs;
        for (int t = 1; t <= horizon; ++t) {
          const int a_id = layout.action_id(t);
          const int o_id = layout.observation_id(t);
          const TaggedHistory key = conditioned_history(layout, actions, obs);
          const int a = rng.sample(process.mechanism_row(a_id, assignment));
          local.record_action_target(key, a);
          assignment[static_cast<std::size_t>(a_id)] = a;
          actions.push_back(a);
          const int o = rng.sample(process.mechanism_row(o_id, assignment));
          assignment[static_cast<std::size_t>(o_id)] = o;
          obs.push_back(o);
        }
      } catch (...) {
#pragma omp critical
        {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    }
#pragma omp critical
    fitted.merge(local);
  }
  if (failed.load()) std::rethrow_exception(error);

  OfflineReport report;
  report.trajectories = trajectories;
  report.horizon = horizon;

  // One row per possible history, exact targets from the engine.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> histories;
  for (int t = 1; t <= horizon; ++t) {
    const int len = t - 1;
    std::uint64_t combos = 1;
    for (int i = 0; i < len; ++i) {
      combos *= static_cast<std::uint64_t>(action_domain) *
                static_cast<std::uint64_t>(obs_domain);
    }
    for (std::uint64_t idx = 0; idx < combos; ++idx) {
      std::vector<int> actions(static_cast<std::size_t>(len)),
          obs(static_cast<std::size_t>(len));
      std::uint64_t rem = idx;
      for (int i = len; i-- > 0;) {
        obs[static_cast<std::size_t>(i)] =
            static_cast<int>(rem % static_cast<std::uint64_t>(obs_domain));
        rem /= static_cast<std::uint64_t>(obs_domain);
        actions[static_cast<std::size_t>(i)] =
            static_cast<int>(rem % static_cast<std::uint64_t>(action_domain));
        rem /= static_cast<std::uint64_t>(action_domain);
      }
      histories.push_back({std::move(actions), std::move(obs)});
    }
  }

  for (const auto& [actions, obs] : histories) {
    const int t = static_cast<int>(actions.size()) + 1;
    const int a_id = layout.action_id(t);
    OfflineKeyRow row;
    row.past_actions = actions;
    row.past_obs = obs;

    const TaggedHistory key = conditioned_history(layout, actions, obs);
    row.fitted = fitted.predict_action(key);
    const auto it = fitted.action_counts().find(encode_history(key));
    if (it != fitted.action_counts().end()) {
      for (std::uint64_t c : it->second) row.key_count += c;
    }

    std::vector<EvidenceItem> conditioned, intervened;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const int step = static_cast<int>(i) + 1;
      conditioned.push_back(
          {layout.action_id(step), actions[i], Mode::Condition});
      intervened.push_back(
          {layout.action_id(step), actions[i], Mode::Intervene});
      conditioned.push_back(
          {layout.observation_id(step), obs[i], Mode::Condition});
      intervened.push_back(
          {layout.observation_id(step), obs[i], Mode::Condition});
    }
    row.conditioned_target = query(process, a_id, conditioned);
    row.intervened_target = query(process, a_id, intervened);
    row.tv_fitted_conditioned = tv_distance(row.fitted, row.conditioned_target);
    row.tv_fitted_intervened = tv_distance(row.fitted, row.intervened_target);
    row.se_tv_fitted_intervened =
        tv_standard_error(row.fitted, row.intervened_target, row.key_count);
    report.rows.push_back(std::move(row));
  }

  // Autoregressive deployment of the fitted table: actions come from the
  // fitted conditionals keyed by the model's own previous actions.
  RunningStat repeat;
  for (std::uint64_t e = 0; e < deploy_episodes; ++e) {
    RandomStream rng(derive_seed(root_seed, trajectories + e));
    std::vector<int> assignment(process.variables().size(), 0);
    const int theta = rng.sample(process.mechanism_row(0, assignment));
    assignment[0] = theta;
    std::vector<int> actions, obs;
    int repeats = 0;
    for (int t = 1; t <= horizon; ++t) {
      const TaggedHistory key = conditioned_history(layout, actions, obs);
      const int a = rng.sample(fitted.predict_action(key));
      if (t > 1 && a == actions.back()) ++repeats;
      assignment[static_cast<std::size_t>(layout.action_id(t))] = a;
      actions.push_back(a);
      const int o = rng.sample(
          process.mechanism_row(layout.observation_id(t), assignment));
      assignment[static_cast<std::size_t>(layout.observation_id(t))] = o;
      obs.push_back(o);
    }
    if (horizon >= 2) {
      repeat.add(static_cast<double>(repeats) /
                 static_cast<double>(horizon - 1));
    }
  }
  report.deployed_repeat_rate = repeat.mean();
  report.deploy_episodes = deploy_episodes;
  return report;
}

}  // namespace causim
