#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace causim {

// Streaming mean / standard error over episode-level statistics.
struct RunningStat {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const RunningStat& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - static_cast<double>(n) * m * m) /
                     static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }
  double standard_error() const {
    return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

// Pearson chi-square statistic for observed counts against expected
// probabilities; cells with no expected mass are skipped.
inline double chi_square_statistic(const std::vector<std::uint64_t>& counts,
                                   const std::vector<double>& expected_probs,
                                   std::uint64_t total) {
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = expected_probs[i] * static_cast<double>(total);
    if (expected <= 0.0) continue;
    const double d = static_cast<double>(counts[i]) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Wilson-Hilferty approximation of the chi-square quantile; accurate
// enough for sanity gates.
inline double chi_square_quantile(double df, double z_upper) {
  const double a = 2.0 / (9.0 * df);
  const double t = 1.0 - a + z_upper * std::sqrt(a);
  return df * t * t * t;
}

}  // namespace causim
