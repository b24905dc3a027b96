#ifndef GHZBELL_RNG_HPP
#define GHZBELL_RNG_HPP

#include <cstdint>

namespace ghzbell {

// Counter-based splittable random stream.
//
// A stream is identified by a (seed, stream) pair.  The generator state is
// derived by running the SplitMix64 mixer over both words, which decorrelates
// streams even for adjacent indices, and is then iterated as xoshiro256++.
// Every Monte Carlo sample in this library draws from the stream whose index
// is the sample number, so results are reproducible bit-for-bit from the seed
// alone, independent of how samples are distributed across worker threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  // Uniform on the full 64-bit range.
  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53-bit resolution.
  double next_unit();

  // Uniform double in [0, 2*pi).
  double next_angle();

  // Uniform double in [-1, 1).
  double next_symmetric();

 private:
  std::uint64_t s_[4];
};

// The SplitMix64 mixing step; exposed because hashing small integer tuples
// into well-spread 64-bit values is useful beyond stream construction.
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace ghzbell

#endif  // GHZBELL_RNG_HPP
