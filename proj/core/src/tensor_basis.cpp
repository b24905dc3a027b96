#include "detail/tensor_basis.hpp"

#include <algorithm>

namespace ghzbell::detail {

namespace {

std::size_t pow3(int n) {
  std::size_t r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

}  // namespace

CorrelationBasis::CorrelationBasis(int n_parties)
    : n_(n_parties), rows_(pow3(n_parties)), cols_(std::size_t{1} << (2 * n_parties)) {
  buf_a_.resize(cols_);
  buf_b_.resize(cols_);
}

void CorrelationBasis::scores(const double* r, double* scores) const {
  // Stage k rewrites the base-3 digit of party k into a base-4 digit by
  // multiplying with the local block.  Layout before stage k:
  //   index = low + 4^k * (t_k + 3 * high),  low < 4^k,  high < 3^(N-k-1).
  double* cur = buf_a_.data();
  double* next = buf_b_.data();
  std::copy(r, r + rows_, cur);
  std::size_t low_size = 1;
  std::size_t high_size = rows_ / 3;
  for (int k = 0; k < n_; ++k) {
    for (std::size_t high = 0; high < high_size; ++high) {
      const double* in0 = cur + low_size * (0 + 3 * high);
      const double* in1 = cur + low_size * (1 + 3 * high);
      const double* in2 = cur + low_size * (2 + 3 * high);
      double* out = next + low_size * 4 * high;
      for (std::size_t low = 0; low < low_size; ++low) {
        const double a = in0[low];
        const double b = in1[low];
        const double c = in2[low];
        out[low] = a + b + c;                     // v_k = 0: o0 = +1, o1 = +1
        out[low + low_size] = a - b + c;          // v_k = 1: o0 = -1, o1 = +1
        out[low + 2 * low_size] = a + b - c;      // v_k = 2: o0 = +1, o1 = -1
        out[low + 3 * low_size] = a - b - c;      // v_k = 3: o0 = -1, o1 = -1
      }
    }
    std::swap(cur, next);
    low_size *= 4;
    high_size /= 3;
  }
  std::copy(cur, cur + cols_, scores);
}

void CorrelationBasis::column(std::uint32_t v, double* col) const {
  col[0] = 1.0;
  std::size_t size = 1;
  for (int k = 0; k < n_; ++k) {
    const double o0 = 1.0 - 2.0 * ((v >> (2 * k)) & 1u);
    const double o1 = 1.0 - 2.0 * ((v >> (2 * k + 1)) & 1u);
    for (std::size_t i = 0; i < size; ++i) {
      col[i + size] = col[i] * o0;
      col[i + 2 * size] = col[i] * o1;
    }
    size *= 3;
  }
}

void CorrelationBasis::add_column(std::uint32_t v, double weight, double* accum) const {
  double* col = buf_a_.data();
  column(v, col);
  for (std::size_t i = 0; i < rows_; ++i) accum[i] += weight * col[i];
}

}  // namespace ghzbell::detail
