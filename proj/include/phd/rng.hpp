#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace phd {

/// Seeded random source whose outputs are fully specified by the seed.
///
/// std::mt19937_64 is bit-exact across standard libraries, but the
/// std::*_distribution adaptors are not, so all derived draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a base seed with stream identifiers into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Sorted uniform sample of `count` distinct indices from [0, population).
std::vector<std::uint64_t> sample_indices(std::uint64_t population,
                                          std::uint64_t count, Rng& rng);

}  // namespace phd
