#include "causim/constants.hpp"

#include <cstdio>

#include "causim/library.hpp"
#include "causim/meta_trainer.hpp"
#include "causim/oracle.hpp"

namespace causim {

namespace {

using oracle::oracle_query;

EvidenceItem cond(int var, int value) {
  return {var, value, Mode::Condition};
}
EvidenceItem dov(int var, int value) {
  return {var, value, Mode::Intervene};
}

// Repeat probability at the second round, averaged over the first
// observation. The first action is uniform for both policies, so the
// observation marginal is the same mixture in both cases.
double bandit_step2_repeat_rate(const CausalProcess& bandit, Mode action_mode) {
  double rate = 0.0;
  const Distribution first = oracle_query(bandit, 1, {});
  for (int a1 = 0; a1 < 5; ++a1) {
    const Distribution obs = oracle_query(bandit, 2, {dov(1, a1)});
    for (int o1 = 0; o1 < 2; ++o1) {
      const Distribution next =
          oracle_query(bandit, 3, {{1, a1, action_mode}, cond(2, o1)});
      rate += first.p[static_cast<std::size_t>(a1)] *
              obs.p[static_cast<std::size_t>(o1)] *
              next.p[static_cast<std::size_t>(a1)];
    }
  }
  return rate;
}

}  // namespace

std::vector<std::pair<std::string, double>> reference_constants() {
  std::vector<std::pair<std::string, double>> out;
  const auto push = [&](const std::string& name, double value) {
    out.emplace_back(name, value);
  };

  {
    const CausalProcess p = build_prize_or_frog();
    push("prize_or_frog.p_a1", oracle_query(p, "A", {}).p[1]);
    push("prize_or_frog.p_o1_given_a1",
         oracle_query(p, "O", {cond(1, 1)}).p[1]);
    push("prize_or_frog.p_theta1_given_a1",
         oracle_query(p, "Theta", {cond(1, 1)}).p[1]);
    push("prize_or_frog.p_theta1_given_do_a1",
         oracle_query(p, "Theta", {dov(1, 1)}).p[1]);
    push("prize_or_frog.p_o1_given_do_a1",
         oracle_query(p, "O", {dov(1, 1)}).p[1]);
  }
  {
    const CausalProcess p = build_prize_or_frog_reversed();
    push("prize_or_frog_reversed.p_theta1_given_do_a1",
         oracle_query(p, "Theta", {dov(0, 1)}).p[1]);
  }
  {
    const CausalProcess p = build_bandit(2);
    push("bandit.p_any_first_arm", oracle_query(p, "A1", {}).p[1]);
    push("bandit.posterior_pulled_given_a_cond",
         oracle_query(p, "Theta", {cond(1, 1)}).p[1]);
    push("bandit.posterior_pulled_given_do_a",
         oracle_query(p, "Theta", {dov(1, 1)}).p[1]);
    push("bandit.posterior_pulled_given_do_a_o1",
         oracle_query(p, "Theta", {dov(1, 1), cond(2, 1)}).p[1]);
    push("bandit.posterior_pulled_given_do_a_o0",
         oracle_query(p, "Theta", {dov(1, 1), cond(2, 0)}).p[1]);
    push("bandit.posterior_pulled_given_a_o1_cond",
         oracle_query(p, "Theta", {cond(1, 1), cond(2, 1)}).p[1]);
    push("bandit.posterior_pulled_given_a_o0_cond",
         oracle_query(p, "Theta", {cond(1, 1), cond(2, 0)}).p[1]);
    push("bandit.repeat_interventional_after_o1",
         oracle_query(p, "A2", {dov(1, 1), cond(2, 1)}).p[1]);
    push("bandit.repeat_interventional_after_o0",
         oracle_query(p, "A2", {dov(1, 1), cond(2, 0)}).p[1]);
    push("bandit.repeat_conditional_after_o1",
         oracle_query(p, "A2", {cond(1, 1), cond(2, 1)}).p[1]);
    push("bandit.repeat_conditional_after_o0",
         oracle_query(p, "A2", {cond(1, 1), cond(2, 0)}).p[1]);
    push("bandit.p_reward_given_do_a",
         oracle_query(p, "O1", {dov(1, 1)}).p[1]);
    push("bandit.step2_repeat_rate_interventional",
         bandit_step2_repeat_rate(p, Mode::Intervene));
    push("bandit.step2_repeat_rate_conditional",
         bandit_step2_repeat_rate(p, Mode::Condition));
  }
  {
    const CausalProcess p = build_bandit(1);
    const oracle::OutcomeTable b = oracle::braided_table(p, nullptr, 1);
    // tuple (theta=1, a=1, abar=1, o=1)
    const std::uint64_t idx = ((1 * 5 + 1) * 5 + 1) * 2 + 1;
    push("bandit.braided_uniform_h1_theta1_a1_abar1_o1", b.prob[idx]);
  }
  {
    const CausalProcess p = build_language_toy();
    const Distribution conditioned =
        oracle_query(p, "x4", {cond(1, 0), cond(2, 2), cond(3, 0)});
    const Distribution intervened =
        oracle_query(p, "x4", {cond(1, 0), dov(2, 2), cond(3, 0)});
    push("language_toy.p_x4_0_all_conditioned", conditioned.p[0]);
    push("language_toy.p_x4_0_x2_intervened", intervened.p[0]);
    push("language_toy.tv_cond_vs_do_at_0_2_0",
         tv_distance(conditioned, intervened));
  }
  {
    const CausalProcess p = build_goal_process();
    push("goal.posterior_theta1_given_g1",
         oracle_query(p, "Theta", {cond(3, 1)}).p[1]);
    push("goal.posterior_theta1_given_do_g1",
         oracle_query(p, "Theta", {dov(3, 1)}).p[1]);
  }
  {
    const CausalProcess p = build_two_round_binary();
    push("two_round.p_a2_1_given_do_a1_0_o1_1",
         oracle_query(p, "A2", {dov(1, 0), cond(2, 1)}).p[1]);
  }
  return out;
}

std::string reference_constants_text() {
  std::string out =
      "# Reference constants computed by the brute-force oracle.\n"
      "# Regenerate with: causim mint\n";
  char buf[64];
  for (const auto& [name, value] : reference_constants()) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += name;
    out += " = ";
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace causim
