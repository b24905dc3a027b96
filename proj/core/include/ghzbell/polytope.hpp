#ifndef GHZBELL_POLYTOPE_HPP
#define GHZBELL_POLYTOPE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ghzbell/correlations.hpp"

namespace ghzbell {

// Local-hidden-variable membership tests against the polytope spanned by
// the 4^N deterministic strategies (each party answers each of its two
// settings with a fixed +-1 outcome).

// One deterministic strategy, encoded in 2 bits per party, little-endian:
// bit 0 of party k's chunk is the outcome under setting 0, bit 1 under
// setting 1, with bit value 1 meaning outcome -1.
struct DeterministicStrategy {
  std::uint32_t code = 0;
  int n_parties = 0;

  // Outcome (+1 or -1) of `party` under `setting`.
  int outcome(int party, int setting) const {
    return ((code >> (2 * party + setting)) & 1u) ? -1 : +1;
  }
};

// All 4^N strategies in ascending code order.  Capped at 8 parties.
std::vector<DeterministicStrategy> enumerate_strategies(int n_parties);

// Correlation vector (3^N entries, subset-index order) of one strategy.
std::vector<double> strategy_correlation_vector(const DeterministicStrategy& s);

// Outcome distribution of one strategy: deterministic, so each settings
// block has a single unit entry.
ProbabilityTable strategy_probability_table(const DeterministicStrategy& s);

enum class PolytopeOutcome : std::uint8_t {
  kLocal,
  kNonlocal,
  kIndeterminate,
};

std::string to_string(PolytopeOutcome outcome);

enum class PolytopeMethod : std::uint8_t {
  kAuto,           // active-set first, simplex fallback on a stall
  kSimplexOnly,    // feasibility LP over all strategy columns
  kActiveSetOnly,  // no fallback; stalls surface as indeterminate
};

struct PolytopeOptions {
  // A decomposition counts as exact when every row residual is at most
  // this; beyond it the point is treated as outside.
  double row_tolerance = 1e-7;
  // Independent re-verification bound for claimed decompositions.
  double certificate_tolerance = 1e-6;
  PolytopeMethod method = PolytopeMethod::kAuto;
  long max_simplex_pivots = 200000;
  long max_active_set_rounds = 2000;
  int max_parties = 6;
};

struct PolytopeVerdict {
  PolytopeOutcome outcome = PolytopeOutcome::kIndeterminate;
  // Sparse convex decomposition (strategy code, weight), kLocal only,
  // re-verified independently of the solver that produced it.
  std::vector<std::pair<std::uint32_t, double>> weights;
  // Largest row residual of the decomposition (kLocal), or of the final
  // iterate (otherwise).
  double max_residual = 0.0;
  // Separating functional tau (3^N entries), kNonlocal only when the
  // certifying path produces one (the simplex fallback does not):
  // <tau, b> exceeds max_v <tau, a_v> by a tolerance-cleared margin.  It
  // can be replayed against other vectors through witness_margin.
  std::vector<double> separating;
  // Human-readable solver trail ("active-set", "simplex-fallback", ...).
  std::string notes;
};

// Reusable checker: owns the solver workspaces, so repeated queries at the
// same party count avoid re-allocating the 4^N structures.  Not
// thread-safe; use one instance per worker.
class LocalPolytopeChecker {
 public:
  explicit LocalPolytopeChecker(int n_parties, PolytopeOptions options = {});
  ~LocalPolytopeChecker();
  LocalPolytopeChecker(LocalPolytopeChecker&&) noexcept;
  LocalPolytopeChecker& operator=(LocalPolytopeChecker&&) noexcept;

  int n_parties() const;
  const PolytopeOptions& options() const;

  // Membership of a full+restricted correlation table.
  PolytopeVerdict check(const CorrelationTable& table);
  // Membership of a raw 3^N correlation vector (entry 0 must be 1).
  PolytopeVerdict check_vector(const std::vector<double>& correlations);

  // Certified excess of `functional` (3^N entries) on `correlations` over
  // every deterministic strategy:
  //   <f, b> - max_v <f, a_v> - row_tolerance |f|_1 - 1e-12 (1 + |f|_1).
  // A positive value proves the vector nonlocal under the same tolerance
  // slack the membership verdicts grant, so a stored separating functional
  // can settle related vectors without rerunning a solver.
  double witness_margin(const std::vector<double>& functional,
                        const std::vector<double>& correlations);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrappers.

// Decides membership from the correlation side.  Requires a table built
// with restricted correlations (Scope::kWithRestricted).
PolytopeVerdict is_local_correlation_basis(const CorrelationTable& table,
                                           const PolytopeOptions& options = {});

// Decides membership from the probability side.  For up to 4 parties this
// runs a feasibility LP directly on the 2^N 2^N-entry distribution; for
// larger N the distribution is first checked for non-signaling consistency
// and then reduced to its correlation vector (throws usage_error if the
// distribution signals, since the reduction would be lossy).
PolytopeVerdict is_local(const ProbabilityTable& table,
                         const PolytopeOptions& options = {});

}  // namespace ghzbell

#endif  // GHZBELL_POLYTOPE_HPP
