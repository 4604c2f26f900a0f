#pragma once

#include <cstdint>
#include <limits>

namespace csense {

/// Identifies one reproducible random stream. The same (master_seed,
/// stream_id) pair yields bit-identical draws on every platform and run,
/// and distinct stream_ids give statistically independent streams, so
/// Monte-Carlo trials can be generated in any order or in parallel.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256** seeded through splitmix64. Stream derivation: the stream
/// key is splitmix64(master_seed) xor (stream_id * 0xD1B54A32D192ED03),
/// and the four state words are consecutive splitmix64 outputs from that
/// key. This layout is fixed; changing it breaks every recorded seed.
class Rng {
 public:
  explicit Rng(SeedSpec spec) {
    std::uint64_t s = spec.master_seed;
    std::uint64_t key = detail::splitmix64_next(s);
    key ^= spec.stream_id * 0xD1B54A32D192ED03ULL;
    for (auto& word : state_) word = detail::splitmix64_next(key);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Fair +-1 draw.
  int rademacher_sign() { return (next_u64() >> 63) ? 1 : -1; }

  /// Unbiased integer in [0, bound) (Lemire rejection).
  std::uint64_t uniform_below(std::uint64_t bound) {
    for (;;) {
      const std::uint64_t x = next_u64();
      const __uint128_t product = static_cast<__uint128_t>(x) * bound;
      const std::uint64_t low = static_cast<std::uint64_t>(product);
      if (low < bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        if (low < threshold) continue;
      }
      return static_cast<std::uint64_t>(product >> 64);
    }
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace csense
