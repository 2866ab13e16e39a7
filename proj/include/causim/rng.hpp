#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "causim/distribution.hpp"

namespace causim {

// splitmix64 step; also the documented seed-split function.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives the seed for child stream `index` from a root seed. Concurrent
// workers must draw from independent streams created this way; the split
// is pure, so any worker count yields the same per-index streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(root ^ splitmix64(index + 1));
}

// Seeded random stream. Sampling goes through explicit helpers instead
// of std distributions so that sequences are identical across standard
// library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Samples an index from a probability vector by CDF inversion.
  int sample(std::span<const double> probs) {
    const double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    // Rounding pushed the CDF below 1; return the last positive entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0.0) return static_cast<int>(i);
    }
    throw ZeroProbabilityError("sampling from an all-zero vector");
  }

  int sample(const Distribution& d) { return sample(std::span(d.p)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace causim
