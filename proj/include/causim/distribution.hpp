#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "causim/errors.hpp"

namespace causim {

inline constexpr double kProbTolerance = 1e-12;

// Normalized probability vector over a finite alphabet.
struct Distribution {
  std::vector<double> p;

  Distribution() = default;
  explicit Distribution(std::vector<double> probs) : p(std::move(probs)) {}

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }

  // Entries non-negative and summing to 1 within tolerance.
  bool is_normalized(double tol = kProbTolerance) const {
    double sum = 0.0;
    for (double x : p) {
      if (x < 0.0 || !std::isfinite(x)) return false;
      sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
  }

  void check_normalized(double tol = kProbTolerance) const {
    if (!is_normalized(tol)) {
      throw ValidationError("distribution is not normalized");
    }
  }
};

// Divides by the total mass; throws ZeroProbabilityError when the mass
// vanishes (nothing to normalize on).
inline Distribution normalize(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) {
    throw ZeroProbabilityError(
        "event has probability zero; nothing to normalize on");
  }
  for (double& w : weights) w /= sum;
  return Distribution(std::move(weights));
}

// Total variation distance: half the L1 distance.
inline double tv_distance(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) {
    throw InvalidAssignmentError("total variation over mismatched alphabets");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a.p[i] - b.p[i]);
  return 0.5 * d;
}

inline double max_abs_diff(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) {
    throw InvalidAssignmentError("comparison over mismatched alphabets");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.p[i] - b.p[i]));
  }
  return d;
}

inline Distribution uniform_distribution(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

inline Distribution point_mass(std::size_t n, std::size_t at) {
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return Distribution(std::move(p));
}

}  // namespace causim
