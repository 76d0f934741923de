#pragma once

#include <cstdint>

namespace costate {

// Portable seedable generator: xoshiro256++ seeded through splitmix64.
// Chosen over std::mt19937 because the standard distributions are
// implementation-defined; every draw here is specified bit-for-bit, so
// cohorts and experiments reproduce across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  // Standard normal via Marsaglia's polar method (log/sqrt only, no
  // sin/cos, to keep cross-libm drift minimal). Caches the spare value.
  double normal();
  double normal(double mean, double stddev);

  // Knuth's algorithm; fine for the small rates used here.
  int poisson(double lambda);

  // Deterministic substream derivation, e.g. one stream per patient or
  // per experiment iteration.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace costate
