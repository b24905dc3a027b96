#include "ghzbell/rng.hpp"

#include <cmath>

namespace ghzbell {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  // Mix both identifiers through SplitMix64 so that nearby (seed, stream)
  // pairs produce statistically independent states.
  std::uint64_t sm = seed;
  (void)splitmix64_next(sm);
  sm ^= stream * kGolden + 0x6A09E667F3BCC909ULL;
  s_[0] = splitmix64_next(sm);
  s_[1] = splitmix64_next(sm);
  s_[2] = splitmix64_next(sm);
  s_[3] = splitmix64_next(sm);
  // All-zero state is invalid for xoshiro; the mixer cannot return four
  // zeros for distinct increments, but keep a cheap guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = kGolden;
}

std::uint64_t RandomStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_angle() {
  return next_unit() * 6.283185307179586476925286766559;
}

double RandomStream::next_symmetric() { return 2.0 * next_unit() - 1.0; }

}  // namespace ghzbell
