#ifndef GHZBELL_DETAIL_TENSOR_BASIS_HPP
#define GHZBELL_DETAIL_TENSOR_BASIS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ghzbell::detail {

// The correlation-basis membership matrix is a tensor power of one 3 x 4
// local block: row trits (absent / setting 0 / setting 1) against the four
// per-party deterministic assignments v (2-bit code, bit 0 = outcome under
// setting 0, bit 1 = outcome under setting 1, bit value 1 meaning -1):
//
//   M[0][v] = 1,  M[1][v] = 1 - 2 (v & 1),  M[2][v] = 1 - 2 ((v >> 1) & 1).
//
// Columns of the full matrix (indexed by base-4 strategy codes, party k in
// digit k) therefore never need to be materialized to compute inner products
// against all of them: contracting one party at a time costs O(N 4^N).
class CorrelationBasis {
 public:
  explicit CorrelationBasis(int n_parties);

  int n_parties() const { return n_; }
  std::size_t rows() const { return rows_; }     // 3^N
  std::size_t columns() const { return cols_; }  // 4^N

  // scores[v] = <r, column_v> for every strategy code v.  `r` has rows()
  // entries, `scores` columns() entries.
  void scores(const double* r, double* scores) const;

  // Writes column v (entries +-1) into `col` (rows() entries).
  void column(std::uint32_t v, double* col) const;

  // Accumulates `weight * column_v` into `accum` (rows() entries).
  void add_column(std::uint32_t v, double weight, double* accum) const;

 private:
  int n_;
  std::size_t rows_;
  std::size_t cols_;
  mutable std::vector<double> buf_a_;  // contraction ping-pong buffers
  mutable std::vector<double> buf_b_;
};

}  // namespace ghzbell::detail

#endif  // GHZBELL_DETAIL_TENSOR_BASIS_HPP
