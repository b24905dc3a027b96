#include "ghzbell/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "ghzbell/errors.hpp"

namespace ghzbell {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-10;
// Consecutive degenerate pivots tolerated before switching to Bland's rule.
constexpr int kDegenerateRun = 50;

}  // namespace

Phase1Result simplex_phase1(std::size_t rows, std::size_t cols,
                            const std::vector<double>& a,
                            const std::vector<double>& b, long max_pivots) {
  if (a.size() != rows * cols || b.size() != rows) {
    throw usage_error("simplex_phase1: matrix/vector dimensions disagree");
  }
  const std::size_t m = rows;
  const std::size_t n = cols;

  // Tableau over the structural columns plus the right-hand side; the
  // artificial columns are tracked implicitly through the basis inverse
  // being applied to the whole tableau.  Layout: row-major, n + 1 columns.
  const std::size_t width = n + 1;
  std::vector<double> t(m * width);
  std::vector<double> obj(width, 0.0);
  std::vector<std::int32_t> basis(m);
  // Artificial variable signs: start from A x + D z = b with D = diag(+-1)
  // chosen so that z = |b| >= 0 is the initial basic solution.
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = (b[i] < 0.0) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i * width + j] = sign * a[i * n + j];
    t[i * width + n] = sign * b[i];
    basis[i] = -1;  // artificial
  }
  // Phase-1 objective: minimize the sum of artificials.  With all
  // artificials basic, the reduced cost of structural column j is
  // -sum_i T[i][j] and the objective value is -sum_i rhs_i.
  for (std::size_t j = 0; j <= n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += t[i * width + j];
    obj[j] = -s;
  }

  Phase1Result result;
  bool bland = false;
  int degenerate_run = 0;

  while (result.pivots < max_pivots) {
    // Pricing: most negative reduced cost (Dantzig), or first negative
    // (Bland) once degeneracy has persisted.
    std::size_t enter = n;
    double best = -kReducedCostTol;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = obj[j];
      if (c < best) {
        enter = j;
        if (bland) break;
        best = c;
      }
    }
    if (enter == n) {
      result.optimal = true;
      break;
    }

    // Ratio test; ties broken by smallest row index, or, under Bland's
    // rule, by smallest leaving-variable index (artificials ordered after
    // structural variables) as the anti-cycling guarantee requires.
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double piv = t[i * width + enter];
      if (piv > kPivotTol) {
        const double ratio = t[i * width + n] / piv;
        if (ratio < best_ratio - 1e-15) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (bland && leave != m) {
      auto var_of = [&](std::size_t i) {
        return basis[i] >= 0 ? static_cast<std::size_t>(basis[i]) : n + i;
      };
      std::size_t best_var = var_of(leave);
      for (std::size_t i = 0; i < m; ++i) {
        const double piv = t[i * width + enter];
        if (piv > kPivotTol) {
          const double ratio = t[i * width + n] / piv;
          if (ratio <= best_ratio + 1e-15 && var_of(i) < best_var) {
            best_var = var_of(i);
            leave = i;
          }
        }
      }
    }
    if (leave == m) {
      // The phase-1 objective is bounded below by zero, so an unbounded ray
      // indicates numerical breakdown.
      throw consistency_error("phase-1 simplex found an unbounded direction");
    }

    degenerate_run = (best_ratio <= 1e-13) ? degenerate_run + 1 : 0;
    if (degenerate_run >= kDegenerateRun) bland = true;

    // Pivot: normalize the leaving row, eliminate the entering column.
    const double piv = t[leave * width + enter];
    double* lrow = &t[leave * width];
    const double inv = 1.0 / piv;
    for (std::size_t j = 0; j <= n; ++j) lrow[j] *= inv;
    lrow[enter] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      double* row = &t[i * width];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) row[j] -= f * lrow[j];
      row[enter] = 0.0;
    }
    const double fo = obj[enter];
    if (fo != 0.0) {
      for (std::size_t j = 0; j <= n; ++j) obj[j] -= fo * lrow[j];
      obj[enter] = 0.0;
    }
    basis[leave] = static_cast<std::int32_t>(enter);
    ++result.pivots;
  }

  result.x.assign(n, 0.0);
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = t[i * width + n];
    if (basis[i] >= 0) {
      result.x[static_cast<std::size_t>(basis[i])] = v;
    } else {
      infeas += std::fabs(v);
    }
  }
  result.infeasibility_l1 = infeas;
  return result;
}

}  // namespace ghzbell
