#pragma once

#include <cstdint>

namespace lhj {

// SplitMix64 (Vigna's public-domain mixer).  All pseudo-randomness in the
// project flows through this generator so that runs are reproducible from a
// named 64-bit seed on any platform.  Stream k of a seed is the generator
// seeded with mix64(seed + (k+1)*GOLDEN); the j-th phase/variate of a stream
// is its j-th output.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Independent substream; deterministic function of (seed, stream).
  SplitMix64 split(std::uint64_t stream) const {
    return SplitMix64(mix64(state_ + (stream + 1) * kGolden));
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  std::uint64_t state_;
};

}  // namespace lhj
