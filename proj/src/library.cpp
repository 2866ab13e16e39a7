#include "causim/library.hpp"

#include <sstream>

namespace causim {

namespace {

VariableSpec var(int id, std::string name, Role role, int domain) {
  return VariableSpec{id, std::move(name), role, domain};
}

Mechanism mech(int variable, std::vector<int> parents,
               std::vector<double> table) {
  return Mechanism{variable, std::move(parents), std::move(table)};
}

// Rows for a size-k "match" mechanism over one size-k parent:
// P(value == parent) = hit, everything else shares the remainder.
std::vector<double> match_table(int k, double hit) {
  const double miss = (1.0 - hit) / static_cast<double>(k - 1);
  std::vector<double> t(static_cast<std::size_t>(k) * k, miss);
  for (int r = 0; r < k; ++r) t[static_cast<std::size_t>(r) * k + r] = hit;
  return t;
}

}  // namespace

CausalProcess build_prize_or_frog() {
  std::vector<VariableSpec> vars{
      var(0, "Theta", Role::Latent, 2),
      var(1, "A", Role::Action, 2),
      var(2, "O", Role::Observation, 2),
  };
  std::vector<Mechanism> mechs{
      mech(0, {}, {0.5, 0.5}),
      mech(1, {0}, {1, 0, 0, 1}),
      // o=1 (reward +1) exactly when the chosen box matches.
      mech(2, {0, 1}, {0, 1, 1, 0, 1, 0, 0, 1}),
  };
  return CausalProcess("prize-or-frog", std::move(vars), std::move(mechs));
}

CausalProcess build_prize_or_frog_reversed() {
  std::vector<VariableSpec> vars{
      var(0, "A", Role::Action, 2),
      var(1, "Theta", Role::Latent, 2),
      var(2, "O", Role::Observation, 2),
  };
  std::vector<Mechanism> mechs{
      mech(0, {}, {0.5, 0.5}),
      mech(1, {0}, {1, 0, 0, 1}),
      // parents ordered (Theta, A) as in the forward variant.
      mech(2, {1, 0}, {0, 1, 1, 0, 1, 0, 0, 1}),
  };
  return CausalProcess("prize-or-frog-reversed", std::move(vars),
                       std::move(mechs));
}

CausalProcess build_bandit(int horizon) {
  if (horizon < 1) {
    throw ValidationError("bandit horizon must be at least 1");
  }
  std::vector<VariableSpec> vars;
  std::vector<Mechanism> mechs;
  vars.push_back(var(0, "Theta", Role::Latent, 5));
  mechs.push_back(mech(0, {}, {0.2, 0.2, 0.2, 0.2, 0.2}));

  const std::vector<double> arm_table = match_table(5, 0.6);
  std::vector<double> reward_table;
  for (int theta = 0; theta < 5; ++theta) {
    for (int a = 0; a < 5; ++a) {
      const double p1 = (a == theta) ? 0.75 : 0.25;
      reward_table.push_back(1.0 - p1);
      reward_table.push_back(p1);
    }
  }

  for (int t = 1; t <= horizon; ++t) {
    const int a_id = 2 * t - 1;
    const int o_id = 2 * t;
    vars.push_back(var(a_id, "A" + std::to_string(t), Role::Action, 5));
    mechs.push_back(mech(a_id, {0}, arm_table));
    vars.push_back(var(o_id, "O" + std::to_string(t), Role::Observation, 2));
    mechs.push_back(mech(o_id, {0, a_id}, reward_table));
  }
  return CausalProcess("bandit", std::move(vars), std::move(mechs));
}

CausalProcess build_two_round_binary() {
  const std::vector<double> act = match_table(2, 0.8);
  // P(o=1) = 0.7 on a match, 0.3 otherwise.
  const std::vector<double> obs{0.3, 0.7, 0.7, 0.3, 0.7, 0.3, 0.3, 0.7};
  std::vector<VariableSpec> vars{
      var(0, "Theta1", Role::Latent, 2), var(1, "A1", Role::Action, 2),
      var(2, "O1", Role::Observation, 2), var(3, "Theta2", Role::Latent, 2),
      var(4, "A2", Role::Action, 2),      var(5, "O2", Role::Observation, 2),
  };
  std::vector<Mechanism> mechs{
      mech(0, {}, {0.5, 0.5}),
      mech(1, {0}, act),
      mech(2, {0, 1}, obs),
      mech(3, {0}, match_table(2, 0.9)),  // latent stays with p 0.9
      mech(4, {3}, act),
      mech(5, {3, 4}, obs),
  };
  return CausalProcess("two-round-binary", std::move(vars), std::move(mechs));
}

CausalProcess build_language_toy() {
  const std::vector<double> token{0.7, 0.2, 0.1, 0.1, 0.2, 0.7};
  std::vector<VariableSpec> vars{
      var(0, "Theta", Role::Latent, 2),
  };
  std::vector<Mechanism> mechs{
      mech(0, {}, {0.5, 0.5}),
  };
  for (int i = 1; i <= 4; ++i) {
    vars.push_back(var(i, "x" + std::to_string(i), Role::Action, 3));
    mechs.push_back(mech(i, {0}, token));
  }
  return CausalProcess("language-toy", std::move(vars), std::move(mechs));
}

CausalProcess build_goal_process() {
  std::vector<VariableSpec> vars{
      var(0, "Theta", Role::Latent, 2),
      var(1, "A", Role::Action, 2),
      var(2, "O", Role::Observation, 2),
      var(3, "G", Role::Goal, 2),
  };
  // Outcome noise is theta-asymmetric so that the goal carries
  // information about the latent through the outcome.
  std::vector<Mechanism> mechs{
      mech(0, {}, {0.5, 0.5}),
      mech(1, {0}, match_table(2, 0.8)),
      mech(2, {0, 1}, {0.3, 0.7, 0.9, 0.1, 0.9, 0.1, 0.1, 0.9}),
      // G copies O with probability 0.9, for either theta.
      mech(3, {0, 2}, {0.9, 0.1, 0.1, 0.9, 0.9, 0.1, 0.1, 0.9}),
  };
  return CausalProcess("goal", std::move(vars), std::move(mechs));
}

CausalProcess build_builtin(const std::string& name, int bandit_horizon) {
  if (name == "prize-or-frog") return build_prize_or_frog();
  if (name == "prize-or-frog-reversed") return build_prize_or_frog_reversed();
  if (name == "bandit") return build_bandit(bandit_horizon);
  if (name == "two-round-binary") return build_two_round_binary();
  if (name == "language-toy") return build_language_toy();
  if (name == "goal") return build_goal_process();
  std::ostringstream oss;
  oss << "unknown process '" << name << "' (valid:";
  for (const std::string& n : builtin_names()) oss << ' ' << n;
  oss << ')';
  throw ValidationError(oss.str());
}

std::vector<std::string> builtin_names() {
  return {"prize-or-frog", "prize-or-frog-reversed", "bandit",
          "two-round-binary", "language-toy", "goal"};
}

}  // namespace causim
