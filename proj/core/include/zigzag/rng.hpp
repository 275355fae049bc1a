#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace zigzag {

/// Counter-seeded xoshiro256++ stream.
///
/// A stream is fully determined by (seed, stream_id): the same pair
/// reproduces the same sequence bit-for-bit on every platform (only
/// 64-bit integer ops and IEEE doubles are involved; no standard-library
/// distributions, whose output is implementation-defined). Distinct
/// stream_ids seed the generator at positions far apart in the splitmix64
/// sequence, giving statistically independent replicate streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t x = 0x9E3779B97F4A7C15ULL ^ seed;
    x = splitmix64(x);
    x += stream_id * 0xD1B54A32D192ED03ULL;
    for (auto& w : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      w = mix(x);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1) draw.
  double exponential() { return -std::log(uniform()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    return mix(x);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace zigzag
