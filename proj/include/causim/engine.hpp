#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "causim/distribution.hpp"
#include "causim/process.hpp"

namespace causim {

// Exact inference is full enumeration; queries whose free-variable space
// exceeds this cap raise CapacityError.
inline constexpr std::uint64_t kEngineEnumerationCap = std::uint64_t{1} << 26;

// Product of mechanism rows for one full assignment.
double joint_probability(const CausalProcess& process,
                         std::span<const int> assignment);

// Truncated factorization: returns a mutilated process in which every
// intervened variable's mechanism is replaced by a parentless point mass
// on the intervened value. Condition-mode items are rejected.
CausalProcess apply_interventions(const CausalProcess& process,
                                  const std::vector<EvidenceItem>& interventions);

// P(target | evidence) by enumeration. Intervene items mutilate the
// process first; Condition items restrict the sum. The result is
// normalized; a conditioning event of probability zero raises
// ZeroProbabilityError.
Distribution query(const CausalProcess& process, int target,
                   const std::vector<EvidenceItem>& evidence);

Distribution query(const CausalProcess& process, const std::string& target,
                   const std::vector<EvidenceItem>& evidence);

}  // namespace causim
