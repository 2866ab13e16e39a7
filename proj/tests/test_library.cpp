#include <doctest.h>

#include <cmath>

#include "causim/engine.hpp"
#include "causim/library.hpp"
#include "causim/oracle.hpp"
#include "causim/spec_format.hpp"
#include "test_support.hpp"

using namespace causim;
using namespace causim::testing;

TEST_CASE("box game: uniform prior action, certain outcome after seeing one") {
  const CausalProcess p = build_prize_or_frog();
  const Distribution first = query(p, "A", {});
  CHECK(std::abs(first.p[0] - 0.5) < 1e-12);
  CHECK(std::abs(first.p[1] - 0.5) < 1e-12);
  CHECK(query(p, "O", {cond(1, 1)}).p[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(query(p, "O", {dov(1, 1)}).p[1] - 0.5) < 1e-12);
}

TEST_CASE("reversed box game: same joint, opposite causal story") {
  const CausalProcess fwd = build_prize_or_frog();
  const CausalProcess rev = build_prize_or_frog_reversed();

  // do(A=1) now pins the configuration.
  CHECK(query(rev, "Theta", {dov(0, 1)}).p[1] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(query(rev, "Theta", {cond(0, 1)}).p[1] ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Identical joint over (Theta, A, O) despite the different order.
  for (int theta = 0; theta < 2; ++theta) {
    for (int a = 0; a < 2; ++a) {
      for (int o = 0; o < 2; ++o) {
        const double fwd_p =
            joint_probability(fwd, std::vector<int>{theta, a, o});
        const double rev_p =
            joint_probability(rev, std::vector<int>{a, theta, o});
        CHECK(fwd_p == rev_p);
      }
    }
  }
}

TEST_CASE("bandit mechanisms carry the exact numeric tables") {
  const CausalProcess p = build_bandit(3);
  CHECK(p.mechanism(0).table == std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2});
  for (int t = 1; t <= 3; ++t) {
    const Mechanism& arm = p.mechanism(2 * t - 1);
    for (int theta = 0; theta < 5; ++theta) {
      for (int a = 0; a < 5; ++a) {
        CHECK(arm.table[static_cast<std::size_t>(theta * 5 + a)] ==
              (a == theta ? 0.6 : 0.1));
      }
    }
    const Mechanism& reward = p.mechanism(2 * t);
    for (int theta = 0; theta < 5; ++theta) {
      for (int a = 0; a < 5; ++a) {
        const std::size_t row = static_cast<std::size_t>(theta * 5 + a);
        CHECK(reward.table[row * 2 + 1] == (a == theta ? 0.75 : 0.25));
      }
    }
  }
}

TEST_CASE("bandit first-round queries") {
  const CausalProcess p = build_bandit(2);
  const Distribution first = query(p, "A1", {});
  for (int a = 0; a < 5; ++a) CHECK(std::abs(first.p[a] - 0.2) < 1e-12);

  const Distribution conditioned = query(p, "Theta", {cond(1, 1)});
  CHECK(std::abs(conditioned.p[1] - 0.6) < 1e-12);
  for (int theta : {0, 2, 3, 4}) {
    CHECK(std::abs(conditioned.p[theta] - 0.1) < 1e-12);
  }

  const Distribution intervened = query(p, "Theta", {dov(1, 1)});
  for (int theta = 0; theta < 5; ++theta) {
    CHECK(std::abs(intervened.p[theta] - 0.2) < 1e-12);
  }
}

TEST_CASE("bandit horizon must be positive") {
  CHECK_THROWS_AS(build_bandit(0), ValidationError);
}

TEST_CASE("two-round process: no backtracking through the first action") {
  const CausalProcess p = build_two_round_binary();
  const Distribution prior = query(p, "Theta1", {});
  for (int a = 0; a < 2; ++a) {
    CHECK(max_abs_diff(query(p, "Theta1", {dov(1, a)}), prior) < 1e-15);
  }
}

TEST_CASE("language toy: dropping the intervened token factor") {
  const CausalProcess p = build_language_toy();

  // Posterior with x2 intervened, straight from the tables: the x2
  // factor is dismissed.
  std::vector<int> x{0, 0, 2, 0, 0};
  std::vector<double> w(2);
  for (int theta = 0; theta < 2; ++theta) {
    x[0] = theta;
    w[static_cast<std::size_t>(theta)] = p.mechanism_prob(0, x, theta) *
                                         p.mechanism_prob(1, x, 0) *
                                         p.mechanism_prob(3, x, 0);
  }
  const Distribution direct = normalize(std::move(w));
  const Distribution engine_result =
      query(p, "Theta", {cond(1, 0), dov(2, 2), cond(3, 0)});
  CHECK(max_abs_diff(direct, engine_result) < 1e-12);

  // And the witness instance separates the two fourth-token predictions.
  const Distribution conditioned =
      query(p, "x4", {cond(1, 0), cond(2, 2), cond(3, 0)});
  const Distribution intervened =
      query(p, "x4", {cond(1, 0), dov(2, 2), cond(3, 0)});
  CHECK(tv_distance(conditioned, intervened) > 0.05);

  // Observed confounder closes the gap entirely.
  for (int theta = 0; theta < 2; ++theta) {
    const Distribution c = query(
        p, "x4", {cond(0, theta), cond(1, 0), cond(2, 2), cond(3, 0)});
    const Distribution i = query(
        p, "x4", {cond(0, theta), cond(1, 0), dov(2, 2), cond(3, 0)});
    CHECK(max_abs_diff(c, i) < 1e-12);
  }
}

TEST_CASE("goal process: conditioning on the goal leaks, intervening does not") {
  const CausalProcess p = build_goal_process();
  const Distribution prior = query(p, "Theta", {});
  bool some_gap = false;
  for (int g = 0; g < 2; ++g) {
    if (tv_distance(query(p, "Theta", {cond(3, g)}), prior) > 0.01) {
      some_gap = true;
    }
    CHECK(max_abs_diff(query(p, "Theta", {dov(3, g)}), prior) < 1e-12);
  }
  CHECK(some_gap);
}

TEST_CASE("unknown built-in names are rejected with the valid list") {
  CHECK_THROWS_WITH_AS(build_builtin("nonesuch"),
                       doctest::Contains("prize-or-frog"), ValidationError);
}

TEST_CASE("round-trip: parse(serialize(p)) answers every query identically") {
  RandomStream rng(555);
  for (const std::string& name : builtin_names()) {
    const CausalProcess original = build_builtin(name, 2);
    const CausalProcess reparsed =
        parse_process_spec(serialize_process_spec(original));

    CHECK(reparsed.name() == original.name());
    for (int i = 0; i < 50; ++i) {
      const int target = static_cast<int>(
          rng.next_u64() %
          static_cast<std::uint64_t>(original.variable_count()));
      const std::vector<EvidenceItem> evidence =
          random_evidence(rng, original, target, 3);
      const Distribution a = query(original, target, evidence);
      const Distribution b = query(reparsed, target, evidence);
      CHECK(max_abs_diff(a, b) < 1e-15);
    }
  }
}

TEST_CASE("round-trip: canonical text is a fixed point of serialization") {
  for (const std::string& name : builtin_names()) {
    const std::string text =
        serialize_process_spec(build_builtin(name, 2));
    CHECK(serialize_process_spec(parse_process_spec(text)) == text);
  }
}
