#ifndef GHZBELL_DETAIL_NNLS_HPP
#define GHZBELL_DETAIL_NNLS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "detail/tensor_basis.hpp"

namespace ghzbell::detail {

// Decides membership of a correlation vector in the convex hull of the
// deterministic-strategy columns by active-set nonnegative least squares
// (Lawson-Hanson with batched column selection).
//
// Because the all-ones normalization row is part of every column, a point
// of the nonnegative cone of the columns that matches that row lies in the
// convex hull, so plain NNLS over the implicit column set decides hull
// membership:
//
//   * if the residual drops below the per-row tolerance the weights are an
//     explicit (near-)convex decomposition -> inside;
//   * at a cone optimum with nonzero residual r, <r, column_v> <= 0 for all
//     v while <r, b> = |r|^2 > 0, so r is a separating functional.  The
//     separation is verified *exactly* against all 4^N columns through the
//     tensor contraction on every round (the candidate functional is just
//     the current residual), which certifies clearly-outside points after a
//     handful of rounds without solving to optimality.
//
// The solver can restrict itself to the rows whose party subset has a given
// size profile.  Projections shrink the dense linear algebra (the dominant
// cost grows with the cube of the row count) while staying sound for the
// "outside" direction: if the projected point falls outside the projected
// hull, the zero-padded residual separates in the full space too.  For the
// even-size profile the reduction is moreover *exact* on tables whose
// odd-size entries vanish identically -- flipping every outcome of every
// strategy fixes even rows and negates odd ones, so averaging any
// even-row solution with its flipped copy reproduces the zero odd rows.
// The same involution maps column v to its bitwise complement, so only one
// representative per pair needs to be scanned; inside weights are expanded
// back onto both members.
//
// Least-squares subproblems use the Gram matrix with an incrementally
// updated Cholesky factor; Gram entries of two strategy columns have O(N)
// closed forms built from three per-party factors (sum over the party
// absent/present-at-either-setting row states).
class NnlsMembership {
 public:
  // Which subset sizes contribute rows.
  enum class RowSet : std::uint8_t {
    kAll,                // every subset: the verbatim membership problem
    kEvenSizes,          // sizes 0, 2, 4, ...; columns collapse into pairs
    kEvenSizesPlusFull,  // even sizes plus the full-support block (odd N)
    kPairsPlusFull,      // sizes {0, 2, N}: cheap first-pass projection
  };

  enum class Status : std::uint8_t {
    kInside,        // residual within row_tolerance; weights valid
    kOutside,       // exact separation certificate with slab margin
    kBoundaryBand,  // cone optimum reached between the two tolerances
    kRoundLimit,    // no verdict within the round budget
  };

  struct Result {
    Status status = Status::kRoundLimit;
    // Strategy codes with strictly positive weight (kInside only).
    std::vector<std::pair<std::uint32_t, double>> weights;
    // Residual max-norm at the final iterate.
    double residual_inf = 0.0;
    // <r,b> - max_v <r,col_v> - row_tol |r|_1 at certification (kOutside).
    double margin = 0.0;
    // Copy of the certifying functional, always full-length (3^N entries,
    // zero on rows outside the row set), so callers can re-verify it
    // against the unprojected problem (kOutside).
    std::vector<double> certificate;
    long rounds = 0;
  };

  explicit NnlsMembership(int n_parties, RowSet row_set = RowSet::kAll);

  int n_parties() const { return basis_.n_parties(); }
  RowSet row_set() const { return row_set_; }
  std::size_t rows() const { return m_; }
  // Whether the flip-pair column collapse is in effect (all row sizes even).
  bool collapsed() const { return collapsed_; }

  // `b` must have 3^N entries (a correlation vector; entry 0 equal to 1)
  // regardless of the row set; the solver gathers its rows itself.
  Result solve(const std::vector<double>& b, double row_tolerance,
               long max_rounds);

 private:
  // Gram entry <column_u, column_v> over the selected rows via the
  // per-party closed form.
  double column_dot(std::uint32_t u, std::uint32_t v) const;
  // Appends strategy v; returns false if numerically dependent on the
  // active columns (then nothing changes).
  bool append_column(std::uint32_t v, const std::vector<double>& score_b);
  void remove_column(std::size_t idx);
  void rebuild_cholesky();
  // Solves (A_P^T A_P) z = A_P^T b through the Cholesky factor.
  void solve_normal(std::vector<double>& z) const;
  // Writes column v gathered onto the selected rows.
  void materialize_column(std::uint32_t v, double* dst) const;

  CorrelationBasis basis_;
  RowSet row_set_;
  bool collapsed_;
  std::size_t m_;          // selected row count (3^N for kAll)
  std::size_t cap_;        // maximum active-set size (m_ + slack)
  std::size_t scan_cols_;  // 4^N, halved under the pair collapse
  std::uint32_t flip_mask_;
  std::vector<std::uint32_t> row_map_;  // selected row -> full row index

  std::vector<std::uint32_t> active_;
  std::vector<double> weight_;
  std::vector<double> cols_;   // materialized active columns, column-major
  std::vector<double> gram_;   // cap-strided, lower triangle used
  std::vector<double> chol_;   // cap-strided lower-triangular factor
  std::vector<double> atb_;    // <column_j, b> for active j

  std::vector<double> scores_;  // 4^N contraction output
  std::vector<double> resid_;   // selected rows
  std::vector<double> embed_;   // full-length scratch, zero off the row set
  std::vector<double> bred_;    // b gathered onto the selected rows
  std::vector<double> fullcol_;
  std::vector<double> zbuf_;
  std::vector<double> vbuf_;  // rank-one-update scratch for removals
  std::vector<std::uint8_t> in_active_;  // per-code membership flag
  long chol_mods_ = 0;        // incremental factor edits since last rebuild
};

}  // namespace ghzbell::detail

#endif  // GHZBELL_DETAIL_NNLS_HPP
