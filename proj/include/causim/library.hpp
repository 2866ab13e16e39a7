#pragma once

#include <string>
#include <vector>

#include "causim/process.hpp"

namespace causim {

// Three-variable box game: a latent configuration, an expert who opens
// the matching box deterministically, and a deterministic outcome.
// Outcome symbol 1 encodes reward +1, symbol 0 encodes reward -1.
CausalProcess build_prize_or_frog();

// Same joint distribution, opposite causal story: the choice is a uniform
// root and the configuration copies it.
CausalProcess build_prize_or_frog_reversed();

// Five-armed Bernoulli bandit played by a noisy expert who knows the
// best arm. One latent arm choice, then `horizon` action/reward rounds.
// P(pull best) = 0.6 (0.1 otherwise); P(reward | best) = 0.75 (0.25
// otherwise).
CausalProcess build_bandit(int horizon);

// Two rounds of binary (latent, action, observation) triplets with a
// drifting latent. Noisy-but-informative parameterization.
CausalProcess build_two_round_binary();

// Latent "intention" plus four vocabulary-3 tokens, conditionally
// independent given the intention. Token distribution (0.7,0.2,0.1)
// under intention 0 and (0.1,0.2,0.7) under intention 1.
CausalProcess build_language_toy();

// Prize-or-frog style core with theta-asymmetric outcome noise, plus a
// final goal variable that copies the outcome with probability 0.9.
CausalProcess build_goal_process();

// Registry for the CLI. `bandit_horizon` only affects the bandit.
// Unknown names raise ValidationError listing the valid names.
CausalProcess build_builtin(const std::string& name, int bandit_horizon = 2);
std::vector<std::string> builtin_names();

}  // namespace causim
