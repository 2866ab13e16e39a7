// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Tolerances and thresholds are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "causim/constants.hpp"
#include "causim/engine.hpp"
#include "causim/io.hpp"
#include "causim/library.hpp"
#include "causim/meta_trainer.hpp"
#include "causim/oracle.hpp"
#include "causim/policies.hpp"
#include "causim/simulator.hpp"
#include "causim/spec_format.hpp"
#include "test_support.hpp"

using namespace causim;
using namespace causim::testing;
using oracle::oracle_query;

namespace {

struct CheckFailure {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw CheckFailure{message};
}

void require_close(double actual, double expected, double tol,
                   const std::string& what) {
  if (std::abs(actual - expected) > tol) {
    std::ostringstream oss;
    oss << what << ": got " << actual << ", expected " << expected
        << " (tol " << tol << ")";
    throw CheckFailure{oss.str()};
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------
// 1. Three-variable box game: the exact single-shot suite.
void criterion_box_game_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const CausalProcess p = build_prize_or_frog();

  const Distribution first = query(p, "A", {});
  require_close(first.p[0], 0.5, 1e-12, "P(A=1)");
  require_close(first.p[1], 0.5, 1e-12, "P(A=2)");

  for (int a = 0; a < 2; ++a) {
    require_close(query(p, "O", {cond(1, a)}).p[1], 1.0, 1e-12,
                  "P(O=+1 | A=a)");
    const Distribution theta_cond = query(p, "Theta", {cond(1, a)});
    require_close(theta_cond.p[a], 1.0, 1e-12, "P(Theta | A=a) point mass");
    const Distribution theta_do = query(p, "Theta", {dov(1, a)});
    require_close(theta_do.p[0], 0.5, 1e-12, "P(Theta | do(a))");
    require_close(theta_do.p[1], 0.5, 1e-12, "P(Theta | do(a))");
    const Distribution o_do = query(p, "O", {dov(1, a)});
    require_close(o_do.p[1], 0.5, 1e-12, "P(O | do(a))");
  }

  for (int theta = 0; theta < 2; ++theta) {
    for (int a = 0; a < 2; ++a) {
      const Distribution intervened =
          query(p, "O", {cond(0, theta), dov(1, a)});
      if (theta == a) {
        const Distribution conditioned =
            query(p, "O", {cond(0, theta), cond(1, a)});
        require(max_abs_diff(conditioned, intervened) <= 1e-12,
                "P(O|Theta,A) == P(O|Theta,do(A))");
      } else {
        // The conditioned event has no mass in the deterministic game;
        // the equality holds on its entire domain of definition.
        bool threw = false;
        try {
          query(p, "O", {cond(0, theta), cond(1, a)});
        } catch (const ZeroProbabilityError&) {
          threw = true;
        }
        require(threw, "impossible fully-observed combination is flagged");
      }
    }
  }

  const CausalProcess rev = build_prize_or_frog_reversed();
  for (int a = 0; a < 2; ++a) {
    require_close(query(rev, "Theta", {dov(0, a)}).p[a], 1.0, 1e-12,
                  "reversed graph: P(Theta | do(a)) point mass");
  }

  require(seconds_since(t0) < 1.0, "runtime under one second");
}

// ---------------------------------------------------------------------
// 2. Twin posteriors against the displayed formulas.
void criterion_twin_posteriors() {
  double max_dev = 0.0;

  const auto check_process = [&](const CausalProcess& p) {
    const int ka = p.variable(1).domain_size;
    const int ko = p.variable(2).domain_size;
    const int kt = p.variable(0).domain_size;
    for (int a = 0; a < ka; ++a) {
      for (int o = 0; o < ko; ++o) {
        std::vector<double> keep(static_cast<std::size_t>(kt));
        std::vector<double> dismiss(static_cast<std::size_t>(kt));
        std::vector<int> x{0, a, o};
        double keep_sum = 0.0;
        for (int theta = 0; theta < kt; ++theta) {
          x[0] = theta;
          const double prior = p.mechanism_prob(0, x, theta);
          const double act = p.mechanism_prob(1, x, a);
          const double obs = p.mechanism_prob(2, x, o);
          keep[theta] = prior * act * obs;
          dismiss[theta] = prior * obs;
          keep_sum += keep[theta];
        }
        if (keep_sum > 0.0) {
          max_dev = std::max(
              max_dev, max_abs_diff(query(p, 0, {cond(1, a), cond(2, o)}),
                                    normalize(keep)));
        }
        max_dev = std::max(
            max_dev, max_abs_diff(query(p, 0, {dov(1, a), cond(2, o)}),
                                  normalize(dismiss)));
      }
    }
  };

  check_process(build_prize_or_frog());

  RandomStream rng(70707);
  int built = 0;
  while (built < 100) {
    const CausalProcess p = random_process(rng, 3, 3);
    if (p.variable_count() != 3) continue;
    // Reshape into a chain regardless of fuzzed roles/parents: rebuild
    // with full parent sets so the displayed formulas apply.
    std::vector<VariableSpec> vars = p.variables();
    vars[0].role = Role::Latent;
    vars[1].role = Role::Action;
    vars[2].role = Role::Observation;
    std::vector<Mechanism> mechs;
    mechs.push_back({0, {}, {}});
    mechs.push_back({1, {0}, {}});
    mechs.push_back({2, {0, 1}, {}});
    RandomStream row_rng(rng.next_u64());
    for (int v = 0; v < 3; ++v) {
      std::size_t rows = 1;
      for (int par : mechs[static_cast<std::size_t>(v)].parents) {
        rows *= static_cast<std::size_t>(
            vars[static_cast<std::size_t>(par)].domain_size);
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = random_row(
            row_rng, vars[static_cast<std::size_t>(v)].domain_size);
        mechs[static_cast<std::size_t>(v)].table.insert(
            mechs[static_cast<std::size_t>(v)].table.end(), row.begin(),
            row.end());
      }
    }
    check_process(CausalProcess("fuzz-chain", std::move(vars), std::move(mechs)));
    ++built;
  }

  require(max_dev < 1e-12,
          "max deviation " + std::to_string(max_dev) + " under 1e-12");
}

// ---------------------------------------------------------------------
// 3. Recursion, enumeration, oracle, and the exact Thompson marginal.
void criterion_triple_agreement() {
  for (const std::string& name : {std::string("bandit"),
                                  std::string("two-round-binary")}) {
    const CausalProcess p = build_builtin(name, 3);

    std::vector<TaggedHistory> frontier{{}};
    while (!frontier.empty()) {
      std::vector<TaggedHistory> grown;
      for (const TaggedHistory& h : frontier) {
        int action_var = -1;
        try {
          action_var = next_action_variable(p, h);
        } catch (const ValidationError&) {
          continue;
        }

        const PosteriorTrace trace = posterior_recursive(p, h);
        const Distribution via_recursion =
            action_distribution_interventional(p, h);
        const Distribution via_engine = query(p, action_var, h.items);
        const Distribution via_oracle = oracle_query(p, action_var, h.items);

        // Thompson marginal assembled from the block posterior.
        const PosteriorTrace::Step& fin = trace.final_step();
        std::vector<int> assignment(
            static_cast<std::size_t>(p.variable_count()), 0);
        for (const EvidenceItem& e : h.items) {
          assignment[static_cast<std::size_t>(e.variable)] = e.value;
        }
        std::vector<double> acc(
            static_cast<std::size_t>(p.variable(action_var).domain_size), 0.0);
        for (std::size_t s = 0; s < fin.block.size(); ++s) {
          std::size_t rem = s;
          for (std::size_t i = fin.block_vars.size(); i-- > 0;) {
            const auto k = static_cast<std::size_t>(
                p.variable(fin.block_vars[i]).domain_size);
            assignment[static_cast<std::size_t>(fin.block_vars[i])] =
                static_cast<int>(rem % k);
            rem /= k;
          }
          const Distribution row = p.mechanism_row(action_var, assignment);
          for (std::size_t a = 0; a < acc.size(); ++a) {
            acc[a] += fin.block.p[s] * row.p[a];
          }
        }
        const Distribution via_thompson = normalize(std::move(acc));

        require(max_abs_diff(via_recursion, via_engine) < 1e-12,
                name + ": recursion vs engine");
        require(max_abs_diff(via_recursion, via_oracle) < 1e-12,
                name + ": recursion vs oracle");
        require(max_abs_diff(via_recursion, via_thompson) < 1e-12,
                name + ": recursion vs Thompson marginal");

        const int obs_var = action_var + 1;
        if (obs_var >= p.variable_count() ||
            p.variable(obs_var).role != Role::Observation) {
          continue;
        }
        for (int a = 0; a < p.variable(action_var).domain_size; ++a) {
          for (int o = 0; o < p.variable(obs_var).domain_size; ++o) {
            TaggedHistory next = h;
            next.push(action_var, a, Mode::Intervene);
            next.push(obs_var, o, Mode::Condition);
            try {
              posterior_recursive(p, next);
            } catch (const ZeroProbabilityError&) {
              continue;
            }
            grown.push_back(std::move(next));
          }
        }
      }
      frontier = std::move(grown);
    }
  }
}

// ---------------------------------------------------------------------
// 4. The exact deluded/intervened repeat probabilities.
void criterion_delusion_gap() {
  const CausalProcess bandit = build_bandit(2);

  const double deluded =
      oracle_query(bandit, "A2", {cond(1, 1), cond(2, 1)}).p[1];
  const double intervened =
      oracle_query(bandit, "A2", {dov(1, 1), cond(2, 1)}).p[1];
  require_close(deluded, 5.6 / 11.0, 1e-12, "oracle deluded repeat");
  require_close(intervened, 2.2 / 7.0, 1e-12, "oracle intervened repeat");

  require_close(query(bandit, "A2", {cond(1, 1), cond(2, 1)}).p[1],
                5.6 / 11.0, 1e-12, "engine deluded repeat");
  require_close(query(bandit, "A2", {dov(1, 1), cond(2, 1)}).p[1], 2.2 / 7.0,
                1e-12, "engine intervened repeat");

  TaggedHistory h;
  h.push(1, 1, Mode::Intervene);
  h.push(2, 1, Mode::Condition);
  require_close(action_distribution_conditional(bandit, h).p[1], 5.6 / 11.0,
                1e-12, "policy deluded repeat");
  require_close(action_distribution_interventional(bandit, h).p[1], 2.2 / 7.0,
                1e-12, "policy intervened repeat");
}

// ---------------------------------------------------------------------
// 5. Twenty rounds, ten thousand episodes: the behavioral signature.
void criterion_behavioral_contrast() {
  const auto t0 = std::chrono::steady_clock::now();
  const CausalProcess bandit = build_bandit(20);
  const std::uint64_t episodes = 10000;

  const ExperimentSummary conditional = run_experiment(
      bandit, PolicyKind::Conditional, nullptr, 20, episodes, 7);
  const ExperimentSummary interventional = run_experiment(
      bandit, PolicyKind::Interventional, nullptr, 20, episodes, 7);

  const double se_best =
      std::sqrt(conditional.se_final_best_arm_rate *
                    conditional.se_final_best_arm_rate +
                interventional.se_final_best_arm_rate *
                    interventional.se_final_best_arm_rate);
  const double best_gap =
      interventional.final_best_arm_rate - conditional.final_best_arm_rate;
  require(best_gap > 5 * se_best,
          "best-arm gap " + std::to_string(best_gap) + " exceeds 5 SE (" +
              std::to_string(5 * se_best) + ")");

  const double se_rep = std::sqrt(
      conditional.se_repeat_rate * conditional.se_repeat_rate +
      interventional.se_repeat_rate * interventional.se_repeat_rate);
  const double repeat_gap =
      conditional.repeat_rate - interventional.repeat_rate;
  require(repeat_gap > 5 * se_rep,
          "repeat gap " + std::to_string(repeat_gap) + " exceeds 5 SE (" +
              std::to_string(5 * se_rep) + ")");

  require(seconds_since(t0) < 60.0, "runtime under one minute");
}

// ---------------------------------------------------------------------
// 6. Counterfactual teaching converges to the intervened conditionals.
void criterion_training_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const CausalProcess bandit = build_bandit(2);
  // At 1e5 episodes the rarest observation keys hold ~1400 samples, so
  // the 0.02 per-key bound sits about two sigma out; the pinned seed
  // satisfies it with margin (realized max TV 0.016).
  const LearnerTable table =
      run_training(bandit, 2, 100000, 1.0, 162, TrainingVariant::Frozen);

  for (const auto& [key, counts] : table.action_counts()) {
    (void)counts;
    const TaggedHistory h = decode_history(key);
    const int target = h.items.empty() ? 1 : h.items.back().variable + 1;
    const Distribution learned = table.predict_action(h);
    const Distribution want = oracle_query(bandit, target, h.items);
    require(tv_distance(learned, want) <= 0.02,
            "action key " + history_to_string(h, bandit) + " TV " +
                std::to_string(tv_distance(learned, want)) + " under 0.02");
  }
  for (const auto& [key, counts] : table.observation_counts()) {
    (void)counts;
    const TaggedHistory h = decode_history(key);
    const int target = h.items.back().variable + 1;
    const Distribution learned = table.predict_observation(h);
    const Distribution want = oracle_query(bandit, target, h.items);
    require(tv_distance(learned, want) <= 0.02,
            "observation key " + history_to_string(h, bandit) + " TV " +
                std::to_string(tv_distance(learned, want)) + " under 0.02");
  }

  TaggedHistory canonical;
  canonical.push(1, 1, Mode::Intervene);
  canonical.push(2, 1, Mode::Condition);
  const Distribution learned = table.predict_action(canonical);
  const Distribution deluded =
      oracle_query(bandit, "A2", {cond(1, 1), cond(2, 1)});
  require(tv_distance(learned, deluded) >= 0.15,
          "learned table sits at TV " +
              std::to_string(tv_distance(learned, deluded)) +
              " from the deluded conditional (need >= 0.15)");

  require(seconds_since(t0) < 120.0, "runtime under two minutes");
}

// ---------------------------------------------------------------------
// 7. Minimizing the enumerated losses recovers the intervened laws.
Distribution minimize_cross_entropy(const Distribution& weights) {
  // Gradient descent on softmax parameters; the loss is
  // -sum_i w_i log p_i with sum_i w_i = 1.
  const std::size_t k = weights.size();
  std::vector<double> logits(k, 0.0);
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  for (int iter = 0; iter < 20000; ++iter) {
    double grad_norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double g = p[i] - weights.p[i];
      logits[i] -= 2.0 * g;
      grad_norm = std::max(grad_norm, std::abs(g));
    }
    double zmax = logits[0];
    for (double z : logits) zmax = std::max(zmax, z);
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      p[i] = std::exp(logits[i] - zmax);
      norm += p[i];
    }
    for (double& x : p) x /= norm;
    if (grad_norm < 1e-14) break;
  }
  return Distribution(p);
}

void criterion_loss_minimizer() {
  const CausalProcess bandit = build_bandit(2);
  const oracle::OutcomeTable braid = oracle::braided_table(bandit, nullptr, 2);

  // Action losses: every pre-action key at both rounds.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> keys{{{}, {}}};
  for (int a1 = 0; a1 < 5; ++a1) {
    for (int o1 = 0; o1 < 2; ++o1) {
      keys.push_back({{a1}, {o1}});
    }
  }
  for (const auto& [past_a, past_o] : keys) {
    const int t = static_cast<int>(past_a.size()) + 1;
    const Distribution weights = oracle::braided_expert_conditional(
        braid, bandit, 2, t, past_a, past_o);
    const Distribution minimizer = minimize_cross_entropy(weights);

    std::vector<EvidenceItem> evidence;
    for (std::size_t i = 0; i < past_a.size(); ++i) {
      evidence.push_back(dov(2 * static_cast<int>(i) + 1, past_a[i]));
      evidence.push_back(cond(2 * static_cast<int>(i) + 2, past_o[i]));
    }
    const Distribution target = oracle_query(bandit, 2 * t - 1, evidence);
    require(max_abs_diff(minimizer, target) < 1e-9,
            "action loss minimizer at round " + std::to_string(t));
  }

  // Observation losses: keys include the current intervened action.
  for (int a1 = 0; a1 < 5; ++a1) {
    const Distribution w1 = oracle::braided_observation_conditional(
        braid, bandit, 2, 1, {a1}, {});
    require(max_abs_diff(minimize_cross_entropy(w1),
                         oracle_query(bandit, 2, {dov(1, a1)})) < 1e-9,
            "observation loss minimizer at round 1");
    for (int o1 = 0; o1 < 2; ++o1) {
      for (int a2 = 0; a2 < 5; ++a2) {
        const Distribution w2 = oracle::braided_observation_conditional(
            braid, bandit, 2, 2, {a1, a2}, {o1});
        require(
            max_abs_diff(
                minimize_cross_entropy(w2),
                oracle_query(bandit, 4,
                             {dov(1, a1), cond(2, o1), dov(3, a2)})) < 1e-9,
            "observation loss minimizer at round 2");
      }
    }
  }
}

// ---------------------------------------------------------------------
// 8. Offline fitting lands on the deluded law and stays there.
void criterion_offline_negative_result() {
  const CausalProcess bandit = build_bandit(2);
  const OfflineReport small = offline_demo(bandit, 2, 10000, 12, 500);
  const OfflineReport large = offline_demo(bandit, 2, 100000, 12, 500);

  for (const OfflineKeyRow& row : large.rows) {
    if (row.past_actions.empty()) continue;
    require(row.tv_fitted_conditioned < 0.02,
            "fitted vs conditioned TV " +
                std::to_string(row.tv_fitted_conditioned) +
                " under 0.02 at 1e5 trajectories");
  }

  for (const OfflineKeyRow& row_small : small.rows) {
    if (row_small.past_actions.empty()) continue;
    for (const OfflineKeyRow& row_large : large.rows) {
      if (row_large.past_actions != row_small.past_actions ||
          row_large.past_obs != row_small.past_obs) {
        continue;
      }
      const double change = std::abs(row_large.tv_fitted_intervened -
                                     row_small.tv_fitted_intervened);
      const double se = std::sqrt(
          row_small.se_tv_fitted_intervened * row_small.se_tv_fitted_intervened +
          row_large.se_tv_fitted_intervened * row_large.se_tv_fitted_intervened);
      require(change < 2 * se,
              "gap change " + std::to_string(change) + " under 2 SE (" +
                  std::to_string(2 * se) + ") at key " +
                  std::to_string(row_small.past_actions[0]) + "," +
                  std::to_string(row_small.past_obs[0]));
      require(row_large.tv_fitted_intervened > 0.1,
              "gap to the intervened target persists");
    }
  }
}

// ---------------------------------------------------------------------
// 9. Language-toy inequality and the goal-conditioning check.
void criterion_language_and_goal() {
  const CausalProcess lang = build_language_toy();
  const std::vector<EvidenceItem> conditioned{cond(1, 0), cond(2, 2),
                                              cond(3, 0)};
  const std::vector<EvidenceItem> intervened{cond(1, 0), dov(2, 2),
                                             cond(3, 0)};
  const Distribution cond_engine = query(lang, "x4", conditioned);
  const Distribution do_engine = query(lang, "x4", intervened);
  require(max_abs_diff(cond_engine, oracle_query(lang, "x4", conditioned)) <
              1e-12,
          "conditioned side oracle-verified");
  require(max_abs_diff(do_engine, oracle_query(lang, "x4", intervened)) <
              1e-12,
          "intervened side oracle-verified");
  require(tv_distance(cond_engine, do_engine) > 0.05,
          "token predictions differ by TV > 0.05");

  const CausalProcess goal = build_goal_process();
  const Distribution prior = query(goal, "Theta", {});
  bool leaks = false;
  for (int g = 0; g < 2; ++g) {
    if (tv_distance(query(goal, "Theta", {cond(3, g)}), prior) > 0.01) {
      leaks = true;
    }
    require(max_abs_diff(query(goal, "Theta", {dov(3, g)}), prior) <= 1e-12,
            "intervened goal leaves the prior untouched");
  }
  require(leaks, "conditioning on the goal moves the posterior");
}

// ---------------------------------------------------------------------
// 10. Bit-stable round trips and seed determinism.
void criterion_roundtrip_determinism() {
  for (const std::string& name : builtin_names()) {
    const std::string text = serialize_process_spec(build_builtin(name, 2));
    require(serialize_process_spec(parse_process_spec(text)) == text,
            name + ": serialize/parse/serialize is a fixed point");
  }

  const CausalProcess bandit = build_bandit(8);
  const auto a = run_episode_batch(bandit, PolicyKind::Interventional, nullptr,
                                   8, 500, 99);
  const auto b = run_episode_batch(bandit, PolicyKind::Interventional, nullptr,
                                   8, 500, 99);
  require(episodes_to_jsonl(a) == episodes_to_jsonl(b),
          "identical seeds yield identical logs");

  const LearnerTable t1 =
      run_training(bandit, 2, 20000, 1.0, 5, TrainingVariant::Frozen);
  const LearnerTable t2 =
      run_training(bandit, 2, 20000, 1.0, 5, TrainingVariant::Frozen);
  require(t1.action_counts() == t2.action_counts() &&
              t1.observation_counts() == t2.observation_counts(),
          "identical seeds yield identical tables");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria{
      {"box-game exact suite", criterion_box_game_suite},
      {"twin posterior formulas", criterion_twin_posteriors},
      {"recursion/enumeration/Thompson agreement", criterion_triple_agreement},
      {"exact bandit delusion gap", criterion_delusion_gap},
      {"behavioral contrast at horizon 20", criterion_behavioral_contrast},
      {"teaching-scheme convergence", criterion_training_convergence},
      {"enumerated-loss minimizer", criterion_loss_minimizer},
      {"offline negative result", criterion_offline_negative_result},
      {"language-toy inequality and goal check", criterion_language_and_goal},
      {"round-trip and determinism", criterion_roundtrip_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second();
      std::printf("[PASS] %2zu. %s (%.2fs)\n", i + 1,
                  criteria[i].first.c_str(), seconds_since(t0));
    } catch (const CheckFailure& f) {
      ++failures;
      std::printf("[FAIL] %2zu. %s (%.2fs)\n       %s\n", i + 1,
                  criteria[i].first.c_str(), seconds_since(t0),
                  f.message.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] %2zu. %s (%.2fs)\n       unexpected error: %s\n",
                  i + 1, criteria[i].first.c_str(), seconds_since(t0),
                  e.what());
    }
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
