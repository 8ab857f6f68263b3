#pragma once

// SplitMix64-based generator. std:: distributions are implementation
// defined, so everything that must reproduce bit-for-bit across
// platforms (codebooks, Monte Carlo streams) goes through this.

#include <cstdint>

namespace fbb {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // uniform in [0, bound), bound >= 1; rejection keeps it exactly uniform
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Independent substream for (seed, index); used for per-trial and
// per-codebook randomness so results do not depend on thread count.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

}  // namespace fbb
