#pragma once

#include <cstdint>
#include <random>

namespace instboot {

// splitmix64 mix of (seed, index); used to derive independent child streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic uniform source. std::mt19937_64 output is fully specified by
// the standard, and the [0,1) mapping below sidesteps
// std::uniform_real_distribution, whose results are implementation-defined.
// Same seed -> same draw sequence on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Independent stream for task `index`, reproducible from the base seed
  // regardless of how much this stream has already been consumed.
  SeededRng derive(std::uint64_t index) const { return SeededRng(mix_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace instboot
