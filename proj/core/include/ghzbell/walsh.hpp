#ifndef GHZBELL_WALSH_HPP
#define GHZBELL_WALSH_HPP

#include <cstddef>
#include <span>

namespace ghzbell {

// In-place unnormalized Walsh-Hadamard transform:
//
//   out[y] = sum_x (-1)^popcount(x & y) in[x]
//
// data.size() must be a power of two.  Applying the transform twice
// multiplies the input by data.size().
inline void fast_walsh_hadamard(std::span<double> data) {
  const std::size_t n = data.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t base = 0; base < n; base += h << 1) {
      for (std::size_t i = base; i < base + h; ++i) {
        const double a = data[i];
        const double b = data[i + h];
        data[i] = a + b;
        data[i + h] = a - b;
      }
    }
  }
}

}  // namespace ghzbell

#endif  // GHZBELL_WALSH_HPP
