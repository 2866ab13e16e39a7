#include <doctest.h>

#include <cmath>
#include <map>

#include "causim/io.hpp"
#include "causim/library.hpp"
#include "causim/simulator.hpp"
#include "causim/stats.hpp"
#include "test_support.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace causim;
using namespace causim::testing;

TEST_CASE("horizon zero yields an empty record with a sampled latent") {
  const CausalProcess bandit = build_bandit(2);
  const EpisodeRecord r =
      run_episode(bandit, PolicyKind::Interventional, nullptr, 0, 42);
  CHECK(r.steps.empty());
  CHECK(r.theta.size() == 1);
  CHECK(r.theta[0] >= 0);
  CHECK(r.theta[0] < 5);
  CHECK_FALSE(r.aborted);
}

TEST_CASE("episodes are deterministic given the seed") {
  const CausalProcess bandit = build_bandit(5);
  const EpisodeRecord a =
      run_episode(bandit, PolicyKind::Conditional, nullptr, 5, 314);
  const EpisodeRecord b =
      run_episode(bandit, PolicyKind::Conditional, nullptr, 5, 314);
  CHECK(episode_to_json(a) == episode_to_json(b));
}

TEST_CASE("batches are identical across worker counts") {
  const CausalProcess bandit = build_bandit(6);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  const auto serial = run_episode_batch(bandit, PolicyKind::Interventional,
                                        nullptr, 6, 500, 99);
#ifdef _OPENMP
  omp_set_num_threads(4);
#endif
  const auto parallel = run_episode_batch(bandit, PolicyKind::Interventional,
                                          nullptr, 6, 500, 99);
  CHECK(episodes_to_jsonl(serial) == episodes_to_jsonl(parallel));
}

TEST_CASE("episode rewards follow the fixed encoding") {
  const CausalProcess bandit = build_bandit(3);
  const auto records = run_episode_batch(bandit, PolicyKind::Interventional,
                                         nullptr, 3, 200, 8);
  for (const EpisodeRecord& r : records) {
    for (const EpisodeStep& s : r.steps) {
      CHECK(s.reward == (s.observation == 1 ? 1.0 : -1.0));
    }
  }
}

TEST_CASE("summary of a single episode is that episode's statistics") {
  const CausalProcess bandit = build_bandit(4);
  const auto records =
      run_episode_batch(bandit, PolicyKind::Interventional, nullptr, 4, 1, 7);
  const ExperimentSummary s = summarize(records, 4);
  CHECK(s.episodes == 1);
  double total = 0.0;
  int repeats = 0;
  for (std::size_t t = 0; t < records[0].steps.size(); ++t) {
    total += records[0].steps[t].reward;
    if (t > 0 && records[0].steps[t].action == records[0].steps[t - 1].action) {
      ++repeats;
    }
  }
  CHECK(s.mean_reward_per_step == doctest::Approx(total / 4.0));
  CHECK(s.repeat_rate == doctest::Approx(repeats / 3.0));
  CHECK(s.se_repeat_rate == 0.0);
}

TEST_CASE("environment fidelity: observed rewards match the mechanisms") {
  const CausalProcess bandit = build_bandit(5);
  const auto records = run_episode_batch(bandit, PolicyKind::Interventional,
                                         nullptr, 5, 20000, 1234);
  // Count reward==1 per (theta, action) cell.
  std::map<std::pair<int, int>, std::pair<std::uint64_t, std::uint64_t>> cells;
  for (const EpisodeRecord& r : records) {
    for (const EpisodeStep& s : r.steps) {
      auto& cell = cells[{r.theta[0], s.action}];
      cell.second += 1;
      if (s.observation == 1) cell.first += 1;
    }
  }
  CHECK(cells.size() == 25);
  double stat = 0.0;
  for (const auto& [key, cell] : cells) {
    const double p = key.first == key.second ? 0.75 : 0.25;
    const double expected = p * static_cast<double>(cell.second);
    const double d = static_cast<double>(cell.first) - expected;
    stat += d * d / (expected * (1 - p));
  }
  CHECK(stat < chi_square_quantile(25.0, 3.09));
}

TEST_CASE("exact second-round repeat rates, both policies") {
  const CausalProcess bandit = build_bandit(2);
  const std::uint64_t n = 20000;

  const ExperimentSummary interventional = run_experiment(
      bandit, PolicyKind::Interventional, nullptr, 2, n, 2025);
  CHECK(std::abs(interventional.repeat_rate - 0.2) <
        3 * interventional.se_repeat_rate);

  const ExperimentSummary conditional =
      run_experiment(bandit, PolicyKind::Conditional, nullptr, 2, n, 2025);
  CHECK(std::abs(conditional.repeat_rate - 58.0 / 165.0) <
        3 * conditional.se_repeat_rate);

  CHECK(conditional.repeat_rate > interventional.repeat_rate);
}

TEST_CASE("interventional play spreads early and concentrates late") {
  const CausalProcess bandit = build_bandit(20);
  const auto records = run_episode_batch(bandit, PolicyKind::Interventional,
                                         nullptr, 20, 4000, 31);
  RunningStat early_repeat, late_repeat, first_best, final_best;
  for (const EpisodeRecord& r : records) {
    for (std::size_t t = 1; t < r.steps.size(); ++t) {
      const double rep =
          r.steps[t].action == r.steps[t - 1].action ? 1.0 : 0.0;
      if (t < 5) early_repeat.add(rep);
      if (t >= 15) late_repeat.add(rep);
    }
    first_best.add(r.steps.front().action == r.theta[0] ? 1.0 : 0.0);
    final_best.add(r.steps.back().action == r.theta[0] ? 1.0 : 0.0);
  }
  const double se_rep = std::sqrt(early_repeat.standard_error() *
                                      early_repeat.standard_error() +
                                  late_repeat.standard_error() *
                                      late_repeat.standard_error());
  CHECK(late_repeat.mean() - early_repeat.mean() > 5 * se_rep);
  const double se_best =
      std::sqrt(first_best.standard_error() * first_best.standard_error() +
                final_best.standard_error() * final_best.standard_error());
  CHECK(final_best.mean() - first_best.mean() > 5 * se_best);
  // The very first pick carries no information: expert marginal 0.2.
  CHECK(std::abs(first_best.mean() - 0.2) < 5 * first_best.standard_error());
}

TEST_CASE("long-horizon contrast: exploration wins, delusion repeats") {
  const CausalProcess bandit = build_bandit(20);
  const ExperimentSummary conditional =
      run_experiment(bandit, PolicyKind::Conditional, nullptr, 20, 2000, 7);
  const ExperimentSummary interventional =
      run_experiment(bandit, PolicyKind::Interventional, nullptr, 20, 2000, 7);

  const double se_best =
      std::sqrt(std::pow(conditional.se_final_best_arm_rate, 2) +
                std::pow(interventional.se_final_best_arm_rate, 2));
  CHECK(interventional.final_best_arm_rate - conditional.final_best_arm_rate >
        3 * se_best);

  const double se_rep = std::sqrt(std::pow(conditional.se_repeat_rate, 2) +
                                  std::pow(interventional.se_repeat_rate, 2));
  CHECK(conditional.repeat_rate - interventional.repeat_rate > 3 * se_rep);
}

TEST_CASE("deluded play on a deterministic game aborts when reality disagrees") {
  const CausalProcess p = build_prize_or_frog();
  const auto records =
      run_episode_batch(p, PolicyKind::Conditional, nullptr, 1, 2000, 11);
  const ExperimentSummary s = summarize(records, 1);
  // The deluded belief is certain of the prize; about half the time the
  // box holds the frog and the history has probability zero.
  CHECK(s.aborted > 800);
  CHECK(s.aborted < 1200);
  CHECK(s.episodes == 2000);
  CHECK(s.mean_reward_per_step == 1.0);  // survivors all found the prize

  const auto sane = run_episode_batch(p, PolicyKind::Interventional, nullptr,
                                      1, 2000, 11);
  CHECK(summarize(sane, 1).aborted == 0);
}

TEST_CASE("learned tables can drive the simulator") {
  const CausalProcess bandit = build_bandit(2);
  const LearnerTable table =
      run_training(bandit, 2, 50000, 1.0, 3, TrainingVariant::Frozen);
  const ExperimentSummary learned = run_experiment(
      bandit, PolicyKind::Learned, &table, 2, 20000, 515);
  // The trained table approximates the intervened conditionals, so its
  // behavior matches the interventional policy's exact repeat rate.
  CHECK(std::abs(learned.repeat_rate - 0.2) < 0.02);
}

TEST_CASE("offline fit on one trajectory returns the smoothed prior") {
  const CausalProcess bandit = build_bandit(2);
  const OfflineReport report = offline_demo(bandit, 2, 1, 1, 100);
  int untouched_keys = 0;
  for (const OfflineKeyRow& row : report.rows) {
    if (row.key_count == 0) {
      ++untouched_keys;
      for (double q : row.fitted.p) CHECK(q == doctest::Approx(0.2));
    }
  }
  CHECK(untouched_keys == 9);  // one t=2 key was visited, nine were not
}

TEST_CASE("offline fit converges to the deluded conditional, not the target") {
  const CausalProcess bandit = build_bandit(2);
  const OfflineReport report = offline_demo(bandit, 2, 30000, 6, 2000);
  for (const OfflineKeyRow& row : report.rows) {
    if (row.past_actions.empty()) continue;  // first-round marginal
    CAPTURE(row.past_actions[0]);
    CAPTURE(row.past_obs[0]);
    CHECK(row.tv_fitted_conditioned < 0.03);
    CHECK(row.tv_fitted_intervened > 0.05);
    CHECK(row.tv_fitted_intervened > row.tv_fitted_conditioned);
  }

  // The canonical key heads to 5.6/11, far from 2.2/7.
  for (const OfflineKeyRow& row : report.rows) {
    if (row.past_actions == std::vector<int>{1} &&
        row.past_obs == std::vector<int>{1}) {
      CHECK(std::abs(row.fitted.p[1] - 5.6 / 11.0) < 0.03);
      CHECK(std::abs(row.fitted.p[1] - 2.2 / 7.0) > 0.1);
      CHECK(row.conditioned_target.p[1] ==
            doctest::Approx(5.6 / 11.0).epsilon(1e-12));
      CHECK(row.intervened_target.p[1] ==
            doctest::Approx(2.2 / 7.0).epsilon(1e-12));
    }
  }

  // Deployment follows the deluded law: repeat rate near 58/165, clearly
  // above the interventional 0.2.
  CHECK(std::abs(report.deployed_repeat_rate - 58.0 / 165.0) < 0.04);
}

TEST_CASE("episode logs carry seeds, latents, and mode tags") {
  const CausalProcess bandit = build_bandit(2);
  const EpisodeRecord r =
      run_episode(bandit, PolicyKind::Conditional, nullptr, 2, 3);
  const std::string json = episode_to_json(r);
  CHECK(json.find("\"seed\":3") != std::string::npos);
  CHECK(json.find("\"theta\":[") != std::string::npos);
  CHECK(json.find("\"mode\":\"cond\"") != std::string::npos);

  const EpisodeRecord ri =
      run_episode(bandit, PolicyKind::Interventional, nullptr, 2, 3);
  CHECK(episode_to_json(ri).find("\"mode\":\"do\"") != std::string::npos);
}

TEST_CASE("summary csv has the fixed column order") {
  CHECK(summary_csv_header() ==
        "policy,horizon,episodes,aborted,mean_reward_per_step,se_mean_reward,"
        "final_best_arm_rate,se_final_best_arm_rate,repeat_rate,"
        "se_repeat_rate");
  const CausalProcess bandit = build_bandit(2);
  const ExperimentSummary s =
      run_experiment(bandit, PolicyKind::Interventional, nullptr, 2, 10, 1);
  const std::string row = summary_csv_row(s);
  CHECK(row.rfind("interventional,2,10,0,", 0) == 0);
}
