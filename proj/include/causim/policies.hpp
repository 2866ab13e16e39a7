#pragma once

#include <vector>

#include "causim/distribution.hpp"
#include "causim/process.hpp"
#include "causim/rng.hpp"

namespace causim {

// Interaction prefix in which every symbol is tagged as conditioned or
// intervened. A symbol and its intervened version are distinct symbols;
// histories differing only in tags are different histories.
struct TaggedHistory {
  std::vector<EvidenceItem> items;

  TaggedHistory() = default;
  explicit TaggedHistory(std::vector<EvidenceItem> i) : items(std::move(i)) {}

  void push(int variable, int value, Mode mode) {
    items.push_back({variable, value, mode});
  }
  bool empty() const { return items.empty(); }
};

// Ids strictly increasing, symbols in range; actions may carry either
// mode, all other roles must be conditioned here.
void check_history(const CausalProcess& process, const TaggedHistory& history);

// Posterior over the joint assignment of the latent block, updated one
// history item at a time. Conditioned items contribute their mechanism
// likelihood; intervened items contribute none (their factor is deleted).
// Latent variables between history items are absorbed into the block.
// The computation touches only raw mechanism rows.
class BeliefState {
 public:
  explicit BeliefState(const CausalProcess& process);

  // First variable not yet absorbed or realized.
  int frontier() const { return frontier_; }
  const std::vector<int>& block_vars() const { return block_vars_; }

  // Normalized posterior over block assignments (odometer order, last
  // block variable cycling fastest).
  Distribution block_distribution() const;

  // Mass of the last applied likelihood update before renormalization,
  // i.e. the predictive probability of that item given the past.
  double last_normalizer() const { return last_normalizer_; }

  // Absorbs every latent variable with id < var into the block. Throws
  // ValidationError if a non-latent variable would be skipped.
  void extend_to(int var);

  // Consumes one tagged symbol; throws ZeroProbabilityError when a
  // conditioning event has no mass.
  void apply(const EvidenceItem& item);

  // Posterior-predictive distribution of `var`: the mechanism row mixed
  // over the block posterior.
  Distribution predictive(int var);

  // Samples a block assignment from the posterior, then a value for
  // `var` from the mechanism row selected by that assignment. The
  // induced marginal equals predictive(var) exactly.
  int sample_posterior_then(int var, RandomStream& rng);

 private:
  void fill_block_assignment(std::size_t state, std::vector<int>& out) const;

  const CausalProcess* process_;
  std::vector<int> realized_;      // committed symbol per variable, -1 if none
  std::vector<int> block_vars_;    // latent ids currently marginalized
  std::vector<double> weights_;    // normalized, over block assignments
  double last_normalizer_ = 1.0;
  int frontier_ = 0;
};

// Per-step snapshots of the latent-block posterior.
struct PosteriorTrace {
  struct Step {
    int after_variable;           // id of the history item, -1 for the
                                  // final frontier extension
    std::vector<int> block_vars;  // latent ids covered by the snapshot
    Distribution block;           // joint posterior over those ids
    double normalizer;            // predictive mass of the item
  };
  std::vector<Step> steps;

  const Step& final_step() const { return steps.back(); }
};

// Recursive posterior over the latent block given a tagged history:
// conditioned symbols contribute likelihoods, intervened symbols none.
// The block is extended through the latents up to the next non-latent
// frontier, so the final snapshot covers the parameters relevant to the
// next decision.
PosteriorTrace posterior_recursive(const CausalProcess& process,
                                   const TaggedHistory& history);

// Next-action distribution with the history's tags honored (the
// self-generated actions are normally tagged Intervene): the expert
// mechanism averaged over the recursive posterior.
Distribution action_distribution_interventional(const CausalProcess& process,
                                                const TaggedHistory& history);

// Deluded baseline: every tag is forced to Condition, so past actions
// are treated as evidence about the latent block.
Distribution action_distribution_conditional(const CausalProcess& process,
                                             const TaggedHistory& history);

// Samples the latent block from the recursive posterior and then an
// action from the expert mechanism at that block.
int thompson_sample(const CausalProcess& process, const TaggedHistory& history,
                    RandomStream& rng);

// Id of the next action variable implied by the history (latents in
// between are absorbed); throws ValidationError when the next non-latent
// variable is not an action.
int next_action_variable(const CausalProcess& process,
                         const TaggedHistory& history);

}  // namespace causim
