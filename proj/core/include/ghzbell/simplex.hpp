#ifndef GHZBELL_SIMPLEX_HPP
#define GHZBELL_SIMPLEX_HPP

#include <cstddef>
#include <vector>

namespace ghzbell {

// Result of a phase-1 simplex run on  A x = b, x >= 0.
struct Phase1Result {
  // True when the solver reached an optimal basis; false when it stopped at
  // the pivot cap (in which case the other fields describe the last basis).
  bool optimal = false;
  // Minimal total artificial mass sum_i |r_i| achieved: 0 (up to round-off)
  // exactly when the system is feasible.
  double infeasibility_l1 = 0.0;
  // Primal variables at the final basis (size n).
  std::vector<double> x;
  long pivots = 0;
};

// Minimizes the L1 infeasibility of  A x = b, x >= 0  with a dense primal
// simplex over the artificial variables (phase 1).  `a` is row-major with
// `rows * cols` entries.  Dantzig pricing with an automatic switch to
// Bland's rule after a run of degenerate pivots guards against cycling.
Phase1Result simplex_phase1(std::size_t rows, std::size_t cols,
                            const std::vector<double>& a,
                            const std::vector<double>& b, long max_pivots);

}  // namespace ghzbell

#endif  // GHZBELL_SIMPLEX_HPP
