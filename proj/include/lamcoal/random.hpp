#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace lamcoal {

/// xoshiro256++ generator. Streams are derived from (seed, stream id) by
/// SplitMix64 hashing, so every replica owns an independent, reproducible
/// sequence regardless of how replicas are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    x = splitmix(x) ^ splitmix(stream ^ 0xd1b54a32d192ed03ULL);
    for (auto& s : state_) {
      x = splitmix(x);
      s = x;
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
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

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform_open()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t splitmix(std::uint64_t&& x) { return splitmix(x); }

  std::uint64_t state_[4];
};

/// Stream ids used by the experiment harness so that independent ensembles
/// never share a stream for the same master seed.
namespace streams {
inline constexpr std::uint64_t coalescent = 0;
inline constexpr std::uint64_t limit_process = 1ULL << 40;
inline constexpr std::uint64_t auxiliary = 2ULL << 40;
}  // namespace streams

}  // namespace lamcoal
