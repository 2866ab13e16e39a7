#include "causim/policies.hpp"

#include <string>

namespace causim {

void check_history(const CausalProcess& process, const TaggedHistory& history) {
  int prev = -1;
  for (const EvidenceItem& e : history.items) {
    check_evidence_item(process, e);
    if (e.variable <= prev) {
      throw ValidationError("history ids must be strictly increasing");
    }
    prev = e.variable;
    const Role role = process.variable(e.variable).role;
    if (role != Role::Action && e.mode == Mode::Intervene) {
      throw ValidationError("only actions may be intervened in a history; '" +
                            process.variable(e.variable).name + "' is " +
                            role_name(role));
    }
  }
}

BeliefState::BeliefState(const CausalProcess& process)
    : process_(&process),
      realized_(static_cast<std::size_t>(process.variable_count()), -1),
      weights_{1.0} {}

void BeliefState::fill_block_assignment(std::size_t state,
                                        std::vector<int>& out) const {
  out = realized_;
  for (std::size_t i = block_vars_.size(); i-- > 0;) {
    const int v = block_vars_[i];
    const std::size_t k =
        static_cast<std::size_t>(process_->variable(v).domain_size);
    out[static_cast<std::size_t>(v)] = static_cast<int>(state % k);
    state /= k;
  }
}

Distribution BeliefState::block_distribution() const {
  return Distribution(weights_);
}

void BeliefState::extend_to(int var) {
  std::vector<int> assignment;
  while (frontier_ < var) {
    const int u = frontier_;
    if (process_->variable(u).role != Role::Latent) {
      throw ValidationError("history skips non-latent variable '" +
                            process_->variable(u).name + "'");
    }
    const std::size_t k =
        static_cast<std::size_t>(process_->variable(u).domain_size);
    std::vector<double> extended(weights_.size() * k);
    for (std::size_t s = 0; s < weights_.size(); ++s) {
      fill_block_assignment(s, assignment);
      for (std::size_t x = 0; x < k; ++x) {
        extended[s * k + x] =
            weights_[s] *
            process_->mechanism_prob(u, assignment, static_cast<int>(x));
      }
    }
    weights_ = std::move(extended);
    block_vars_.push_back(u);
    ++frontier_;
  }
}

void BeliefState::apply(const EvidenceItem& item) {
  check_evidence_item(*process_, item);
  if (item.variable < frontier_) {
    throw ValidationError("history item for '" +
                          process_->variable(item.variable).name +
                          "' arrives out of order");
  }
  extend_to(item.variable);
  const int v = item.variable;

  if (item.mode == Mode::Condition) {
    std::vector<int> assignment;
    double total = 0.0;
    for (std::size_t s = 0; s < weights_.size(); ++s) {
      fill_block_assignment(s, assignment);
      weights_[s] *= process_->mechanism_prob(v, assignment, item.value);
      total += weights_[s];
    }
    if (!(total > 0.0)) {
      throw ZeroProbabilityError("conditioning on '" +
                                 process_->variable(v).name + "' = " +
                                 std::to_string(item.value) +
                                 " has probability zero");
    }
    for (double& w : weights_) w /= total;
    last_normalizer_ = total;
  } else {
    // Intervened symbol: the mechanism factor is deleted, beliefs about
    // the block are untouched.
    last_normalizer_ = 1.0;
  }
  realized_[static_cast<std::size_t>(v)] = item.value;
  frontier_ = v + 1;
}

Distribution BeliefState::predictive(int var) {
  extend_to(var);
  const std::size_t k =
      static_cast<std::size_t>(process_->variable(var).domain_size);
  std::vector<double> acc(k, 0.0);
  std::vector<int> assignment;
  for (std::size_t s = 0; s < weights_.size(); ++s) {
    if (weights_[s] == 0.0) continue;
    fill_block_assignment(s, assignment);
    for (std::size_t x = 0; x < k; ++x) {
      acc[x] += weights_[s] *
                process_->mechanism_prob(var, assignment, static_cast<int>(x));
    }
  }
  return normalize(std::move(acc));
}

int BeliefState::sample_posterior_then(int var, RandomStream& rng) {
  extend_to(var);
  const std::size_t state =
      static_cast<std::size_t>(rng.sample(std::span(weights_)));
  std::vector<int> assignment;
  fill_block_assignment(state, assignment);
  return rng.sample(process_->mechanism_row(var, assignment));
}

namespace {

BeliefState replay(const CausalProcess& process, const TaggedHistory& history) {
  check_history(process, history);
  BeliefState belief(process);
  for (const EvidenceItem& e : history.items) belief.apply(e);
  return belief;
}

// First non-latent variable at or after the frontier; variable_count()
// when the history is complete.
int decision_frontier(const CausalProcess& process, const BeliefState& belief) {
  int v = belief.frontier();
  while (v < process.variable_count() &&
         process.variable(v).role == Role::Latent) {
    ++v;
  }
  return v;
}

}  // namespace

PosteriorTrace posterior_recursive(const CausalProcess& process,
                                   const TaggedHistory& history) {
  check_history(process, history);
  BeliefState belief(process);
  PosteriorTrace trace;
  for (const EvidenceItem& e : history.items) {
    belief.apply(e);
    trace.steps.push_back({e.variable, belief.block_vars(),
                           belief.block_distribution(),
                           belief.last_normalizer()});
  }
  belief.extend_to(decision_frontier(process, belief));
  trace.steps.push_back(
      {-1, belief.block_vars(), belief.block_distribution(), 1.0});
  return trace;
}

Distribution action_distribution_interventional(const CausalProcess& process,
                                                const TaggedHistory& history) {
  BeliefState belief = replay(process, history);
  const int next = decision_frontier(process, belief);
  if (next >= process.variable_count() ||
      process.variable(next).role != Role::Action) {
    throw ValidationError("next variable after the history is not an action");
  }
  return belief.predictive(next);
}

Distribution action_distribution_conditional(const CausalProcess& process,
                                             const TaggedHistory& history) {
  TaggedHistory conditioned = history;
  for (EvidenceItem& e : conditioned.items) e.mode = Mode::Condition;
  return action_distribution_interventional(process, conditioned);
}

int thompson_sample(const CausalProcess& process, const TaggedHistory& history,
                    RandomStream& rng) {
  BeliefState belief = replay(process, history);
  const int next = decision_frontier(process, belief);
  if (next >= process.variable_count() ||
      process.variable(next).role != Role::Action) {
    throw ValidationError("next variable after the history is not an action");
  }
  return belief.sample_posterior_then(next, rng);
}

int next_action_variable(const CausalProcess& process,
                         const TaggedHistory& history) {
  BeliefState belief = replay(process, history);
  const int next = decision_frontier(process, belief);
  if (next >= process.variable_count() ||
      process.variable(next).role != Role::Action) {
    throw ValidationError("next variable after the history is not an action");
  }
  return next;
}

}  // namespace causim
