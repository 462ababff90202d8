#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qkdsim {

/// Explicitly threaded random source. Every stochastic operation takes one by
/// reference; there is no global generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a run seed and a stream label.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Number of successes in n Bernoulli(p) trials.
  unsigned binomial(unsigned n, double p);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qkdsim
