#pragma once

// Deterministic random stream used by every corruption op.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The distributions are implemented here rather than taken from
// <random>, because the standard library distributions are allowed to differ
// between implementations and corruption output has to be byte-identical
// across platforms.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "hypersumm/text.hpp"

namespace hypersumm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-dialogue stream seed: independent of processing order, so dialogues
/// can be corrupted in parallel without changing the output.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view interview_id,
                                        std::uint64_t replica = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ text::fnv1a64(interview_id));
  h = splitmix64(h ^ replica);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be >= 1. Unbiased (rejection).
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Knuth's multiplicative Poisson sampler; fine for the small means used
  /// by span masking (callers cap lambda).
  std::uint64_t poisson(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = uniform01();
    while (p > limit) {
      ++k;
      p *= uniform01();
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hypersumm
