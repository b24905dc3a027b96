#include "ghzbell/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "detail/nnls.hpp"
#include "detail/tensor_basis.hpp"
#include "ghzbell/errors.hpp"
#include "ghzbell/simplex.hpp"
#include "ghzbell/walsh.hpp"

namespace ghzbell {

namespace {

constexpr int kAbsoluteMaxParties = 8;  // 2-bit-per-party codes in uint32_t

std::size_t pow3(int n) {
  std::size_t r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

void require_party_count(int n_parties, int cap, const char* what) {
  if (n_parties < 1) throw usage_error(std::string(what) + ": need at least one party");
  if (n_parties > cap) {
    throw resource_error(std::string(what) + ": party count " +
                         std::to_string(n_parties) + " exceeds cap " +
                         std::to_string(cap));
  }
}

std::string format_note(const char* fmt, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, value);
  return std::string(buf);
}

// Outcome index produced by strategy `st` under joint settings `s`.
std::uint32_t strategy_outcome_index(const DeterministicStrategy& st,
                                     std::uint32_t s) {
  std::uint32_t o = 0;
  for (int k = 0; k < st.n_parties; ++k) {
    if (st.outcome(k, static_cast<int>((s >> k) & 1u)) < 0) o |= 1u << k;
  }
  return o;
}

}  // namespace

std::vector<DeterministicStrategy> enumerate_strategies(int n_parties) {
  require_party_count(n_parties, kAbsoluteMaxParties, "enumerate_strategies");
  const std::uint32_t count = 1u << (2 * n_parties);
  std::vector<DeterministicStrategy> out;
  out.reserve(count);
  for (std::uint32_t code = 0; code < count; ++code) {
    out.push_back(DeterministicStrategy{code, n_parties});
  }
  return out;
}

std::vector<double> strategy_correlation_vector(const DeterministicStrategy& s) {
  require_party_count(s.n_parties, kAbsoluteMaxParties,
                      "strategy_correlation_vector");
  detail::CorrelationBasis basis(s.n_parties);
  std::vector<double> col(basis.rows());
  basis.column(s.code, col.data());
  return col;
}

ProbabilityTable strategy_probability_table(const DeterministicStrategy& s) {
  require_party_count(s.n_parties, kAbsoluteMaxParties,
                      "strategy_probability_table");
  ProbabilityTable table;
  table.n_parties = s.n_parties;
  const std::uint32_t n_settings = 1u << s.n_parties;
  table.values.assign(static_cast<std::size_t>(n_settings) * n_settings, 0.0);
  for (std::uint32_t set = 0; set < n_settings; ++set) {
    const std::uint32_t o = strategy_outcome_index(s, set);
    table.values[(static_cast<std::size_t>(set) << s.n_parties) + o] = 1.0;
  }
  return table;
}

std::string to_string(PolytopeOutcome outcome) {
  switch (outcome) {
    case PolytopeOutcome::kLocal:
      return "local";
    case PolytopeOutcome::kNonlocal:
      return "nonlocal";
    case PolytopeOutcome::kIndeterminate:
      return "indeterminate";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

struct LocalPolytopeChecker::Impl {
  // A row projection tried before the verbatim problem.  Projections decide
  // "outside" soundly on their own (the zero-padded residual separates in
  // the full space); `exact` marks the even-size projection on tables whose
  // odd-size entries vanish identically, where "inside" is conclusive too.
  struct Stage {
    detail::NnlsMembership engine;
    bool exact;
    const char* label;
  };

  int n;
  PolytopeOptions opts;
  detail::NnlsMembership nnls;
  std::vector<Stage> cascade;
  std::vector<std::uint32_t> odd_rows;  // subset indices with odd party count
  std::vector<std::uint32_t> full_rows;  // all-parties rows, by settings mask
  std::vector<double> block;             // scratch for the full-block test
  // Separate basis instance for independent re-verification of solver
  // output (and for the simplex fallback's matrix assembly).
  detail::CorrelationBasis verify;
  std::vector<double> accum;

  Impl(int n_parties, PolytopeOptions options)
      : n(n_parties), opts(options), nnls(n_parties), verify(n_parties) {
    accum.resize(verify.rows());
    using RowSet = detail::NnlsMembership::RowSet;
    // Row-projection ladder, cheapest first.  Exact GHZ-state tables have
    // identically zero correlations on every odd-size proper subset, and
    // flipping all outcomes of a strategy negates exactly the odd-size
    // rows, so on such tables membership restricted to the even-size rows
    // is equivalent to full membership when N is even.  For odd N the full
    // block is odd-size and carries the phase information, so the
    // projections stay mere prefilters there.
    if (n >= 6 && n % 2 == 0) {
      cascade.push_back(
          {detail::NnlsMembership(n, RowSet::kPairsPlusFull), false, "pair rows"});
    }
    if (n >= 4 && n % 2 == 0) {
      cascade.push_back(
          {detail::NnlsMembership(n, RowSet::kEvenSizes), true, "even rows"});
    }
    if (n >= 5 && n % 2 == 1) {
      cascade.push_back(
          {detail::NnlsMembership(n, RowSet::kPairsPlusFull), false, "pair rows"});
      cascade.push_back({detail::NnlsMembership(n, RowSet::kEvenSizesPlusFull),
                         false, "even+full rows"});
    }
    for (std::uint32_t t = 0; t < verify.rows(); ++t) {
      std::uint32_t rem = t;
      int present = 0;
      for (int k = 0; k < n; ++k) {
        if (rem % 3 != 0) ++present;
        rem /= 3;
      }
      if (present % 2 == 1) odd_rows.push_back(t);
    }
    full_rows.resize(std::size_t{1} << n);
    for (std::uint32_t u = 0; u < full_rows.size(); ++u) {
      std::uint32_t t = 0;
      std::uint32_t scale = 1;
      for (int k = 0; k < n; ++k) {
        t += (1u + ((u >> k) & 1u)) * scale;
        scale *= 3;
      }
      full_rows[u] = t;
    }
    block.resize(full_rows.size());
  }

  // Sufficient nonlocality test on the all-parties block.  Its local
  // projection is exactly the set of vectors whose sign-transform L1 norm
  // stays within 2^N, and a violating sign pattern sigma lifts to the
  // linear witness tau = transform(sigma), whose maximum over deterministic
  // strategies is 2^N exactly (each strategy's transformed block is a
  // single +-2^N spike).  Firing only when the excess clears the same
  // row-tolerance slack the solvers grant keeps every verdict as strict as
  // the LP's.
  bool full_block_shortcut(const std::vector<double>& b, PolytopeVerdict* out) {
    const std::size_t m = full_rows.size();
    for (std::size_t u = 0; u < m; ++u) block[u] = b[full_rows[u]];
    fast_walsh_hadamard(block);
    double s = 0.0;
    for (double c : block) s += std::fabs(c);
    const double bound = static_cast<double>(m);
    const double excess = s - bound;
    if (excess <= 1e-9) return false;
    for (double& c : block) c = (c < 0.0) ? -1.0 : 1.0;
    fast_walsh_hadamard(block);
    double witness_l1 = 0.0;
    for (double c : block) witness_l1 += std::fabs(c);
    const double margin = excess - opts.row_tolerance * witness_l1 -
                          1e-12 * (1.0 + witness_l1);
    if (margin <= 0.0) return false;
    out->outcome = PolytopeOutcome::kNonlocal;
    out->max_residual = 0.0;
    out->separating.assign(b.size(), 0.0);
    for (std::size_t u = 0; u < m; ++u) out->separating[full_rows[u]] = block[u];
    out->notes = format_note(
        "full-correlation block; sign-transform excess %.3e over local bound",
        excess);
    return true;
  }

  bool odd_rows_vanish(const std::vector<double>& b) const {
    for (std::uint32_t t : odd_rows) {
      if (b[t] != 0.0) return false;
    }
    return true;
  }

  PolytopeVerdict check_vector(const std::vector<double>& b);
  PolytopeVerdict active_set_path(const std::vector<double>& b);
  PolytopeVerdict simplex_path(const std::vector<double>& b);
  PolytopeVerdict verified_local(
      std::vector<std::pair<std::uint32_t, double>> weights,
      const std::vector<double>& b, std::string solver_note);
  // Margin of the separating functional r against every strategy column,
  // re-derived with the verification basis; positive certifies nonlocality.
  double certified_margin(const std::vector<double>& r,
                          const std::vector<double>& b);
};

LocalPolytopeChecker::LocalPolytopeChecker(int n_parties, PolytopeOptions options) {
  require_party_count(n_parties,
                      std::min(options.max_parties, kAbsoluteMaxParties),
                      "LocalPolytopeChecker");
  impl_ = std::make_unique<Impl>(n_parties, options);
}

LocalPolytopeChecker::~LocalPolytopeChecker() = default;
LocalPolytopeChecker::LocalPolytopeChecker(LocalPolytopeChecker&&) noexcept = default;
LocalPolytopeChecker& LocalPolytopeChecker::operator=(LocalPolytopeChecker&&) noexcept =
    default;

int LocalPolytopeChecker::n_parties() const { return impl_->n; }

const PolytopeOptions& LocalPolytopeChecker::options() const { return impl_->opts; }

PolytopeVerdict LocalPolytopeChecker::check(const CorrelationTable& table) {
  if (!table.has_restricted()) {
    throw usage_error(
        "polytope membership needs restricted correlations; build the table "
        "with Scope::kWithRestricted");
  }
  if (table.n_parties() != impl_->n) {
    throw usage_error("correlation table party count does not match checker");
  }
  return impl_->check_vector(table.correlation_vector());
}

PolytopeVerdict LocalPolytopeChecker::check_vector(
    const std::vector<double>& correlations) {
  return impl_->check_vector(correlations);
}

double LocalPolytopeChecker::witness_margin(
    const std::vector<double>& functional,
    const std::vector<double>& correlations) {
  if (functional.size() != impl_->verify.rows() ||
      correlations.size() != impl_->verify.rows()) {
    throw usage_error("witness_margin: vectors must have 3^N entries");
  }
  double l1 = 0.0;
  for (double v : functional) l1 += std::fabs(v);
  return impl_->certified_margin(functional, correlations) - 1e-12 * (1.0 + l1);
}

PolytopeVerdict LocalPolytopeChecker::Impl::check_vector(
    const std::vector<double>& b) {
  if (b.size() != verify.rows()) {
    throw usage_error("correlation vector has wrong length");
  }
  if (std::fabs(b[0] - 1.0) > 1e-9) {
    throw usage_error("correlation vector entry 0 (empty subset) must be 1");
  }
  for (double v : b) {
    if (std::fabs(v) > 1.0 + 1e-9) {
      throw usage_error("correlation vector entry outside [-1, 1]");
    }
  }
  switch (opts.method) {
    case PolytopeMethod::kSimplexOnly:
      return simplex_path(b);
    case PolytopeMethod::kActiveSetOnly:
      return active_set_path(b);
    case PolytopeMethod::kAuto: {
      // Forced-method runs stay pure solver paths; only the auto route
      // takes the closed-form shortcut.
      PolytopeVerdict quick;
      if (full_block_shortcut(b, &quick)) return quick;
      return active_set_path(b);
    }
  }
  return simplex_path(b);
}

PolytopeVerdict LocalPolytopeChecker::Impl::verified_local(
    std::vector<std::pair<std::uint32_t, double>> weights,
    const std::vector<double>& b, std::string solver_note) {
  PolytopeVerdict verdict;
  double total = 0.0;
  for (const auto& [code, w] : weights) total += w;
  if (std::fabs(total - 1.0) > 1e-4 || total <= 0.0) {
    verdict.outcome = PolytopeOutcome::kIndeterminate;
    verdict.notes = solver_note + "; decomposition weights sum to " +
                    std::to_string(total) + ", rejected";
    return verdict;
  }
  for (auto& [code, w] : weights) w /= total;

  // Independent rebuild of sum_v w_v a_v against b.
  std::fill(accum.begin(), accum.end(), 0.0);
  for (const auto& [code, w] : weights) verify.add_column(code, w, accum.data());
  double max_res = 0.0;
  for (std::size_t i = 0; i < accum.size(); ++i) {
    max_res = std::max(max_res, std::fabs(accum[i] - b[i]));
  }
  if (max_res > opts.certificate_tolerance) {
    verdict.outcome = PolytopeOutcome::kIndeterminate;
    verdict.max_residual = max_res;
    verdict.notes = solver_note +
                    format_note("; decomposition failed re-verification "
                                "(max residual %.3e)",
                                max_res);
    return verdict;
  }
  verdict.outcome = PolytopeOutcome::kLocal;
  verdict.weights = std::move(weights);
  verdict.max_residual = max_res;
  verdict.notes = std::move(solver_note);
  return verdict;
}

double LocalPolytopeChecker::Impl::certified_margin(
    const std::vector<double>& r, const std::vector<double>& b) {
  // Re-derive the separation margin from the stored functional with the
  // verification basis (independent of the solver's cached state).
  double rb = 0.0;
  double r_l1 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    rb += r[i] * b[i];
    r_l1 += std::fabs(r[i]);
  }
  std::vector<double> scores(verify.columns());
  verify.scores(r.data(), scores.data());
  const double max_score = *std::max_element(scores.begin(), scores.end());
  return rb - max_score - opts.row_tolerance * r_l1;
}

PolytopeVerdict LocalPolytopeChecker::Impl::active_set_path(
    const std::vector<double>& b) {
  using Status = detail::NnlsMembership::Status;

  // Parity-structured tables go through the row-projection ladder first.
  // Every verdict issued here is re-verified in the full space; anything
  // the ladder cannot settle falls through to the verbatim problem below.
  if (!cascade.empty() && odd_rows_vanish(b)) {
    for (auto& stage : cascade) {
      const auto result =
          stage.engine.solve(b, opts.row_tolerance, opts.max_active_set_rounds);
      if (result.status == Status::kOutside) {
        const double margin = certified_margin(result.certificate, b);
        if (margin > 0.0) {
          PolytopeVerdict verdict;
          verdict.outcome = PolytopeOutcome::kNonlocal;
          verdict.max_residual = result.residual_inf;
          verdict.separating = result.certificate;
          verdict.notes = std::string("active-set (") + stage.label + ")" +
                          format_note("; separation margin %.3e", margin);
          return verdict;
        }
      } else if (result.status == Status::kInside && stage.exact) {
        auto verdict = verified_local(
            result.weights, b, std::string("active-set (") + stage.label + ")");
        if (verdict.outcome == PolytopeOutcome::kLocal) return verdict;
        break;  // re-verification failed; retry on the full rows
      }
      // kInside on a plain projection, kBoundaryBand, or kRoundLimit:
      // inconclusive at this stage.
    }
  }

  const auto result = nnls.solve(b, opts.row_tolerance, opts.max_active_set_rounds);
  PolytopeVerdict verdict;
  switch (result.status) {
    case Status::kInside:
      return verified_local(result.weights, b, "active-set");
    case Status::kOutside: {
      const double margin = certified_margin(result.certificate, b);
      if (margin <= 0.0) {
        verdict.outcome = PolytopeOutcome::kIndeterminate;
        verdict.notes = format_note(
            "active-set separation certificate failed re-verification "
            "(margin %.3e)",
            margin);
        return verdict;
      }
      verdict.outcome = PolytopeOutcome::kNonlocal;
      verdict.max_residual = result.residual_inf;
      verdict.separating = result.certificate;
      verdict.notes = format_note("active-set; separation margin %.3e", margin);
      return verdict;
    }
    case Status::kBoundaryBand:
      verdict.outcome = PolytopeOutcome::kIndeterminate;
      verdict.max_residual = result.residual_inf;
      verdict.notes = format_note(
          "active-set optimum inside the tolerance band (residual %.3e)",
          result.residual_inf);
      return verdict;
    case Status::kRoundLimit:
      if (opts.method == PolytopeMethod::kAuto) {
        auto fallback = simplex_path(b);
        fallback.notes = "active-set stalled; " + fallback.notes;
        return fallback;
      }
      verdict.outcome = PolytopeOutcome::kIndeterminate;
      verdict.max_residual = result.residual_inf;
      verdict.notes = "active-set stalled at the round limit";
      return verdict;
  }
  verdict.outcome = PolytopeOutcome::kIndeterminate;
  verdict.notes = "unreachable solver status";
  return verdict;
}

PolytopeVerdict LocalPolytopeChecker::Impl::simplex_path(
    const std::vector<double>& b) {
  const std::size_t rows = verify.rows();
  const std::size_t cols = verify.columns();
  std::vector<double> a(rows * cols);
  std::vector<double> col(rows);
  for (std::uint32_t v = 0; v < cols; ++v) {
    verify.column(v, col.data());
    for (std::size_t r = 0; r < rows; ++r) a[r * cols + v] = col[r];
  }
  const auto lp = simplex_phase1(rows, cols, a, b, opts.max_simplex_pivots);

  PolytopeVerdict verdict;
  if (!lp.optimal) {
    verdict.outcome = PolytopeOutcome::kIndeterminate;
    verdict.notes = "simplex reached the pivot cap";
    return verdict;
  }
  // Residual of the returned weights.
  std::fill(accum.begin(), accum.end(), 0.0);
  std::vector<std::pair<std::uint32_t, double>> weights;
  for (std::uint32_t v = 0; v < cols; ++v) {
    if (lp.x[v] > 0.0) {
      weights.emplace_back(v, lp.x[v]);
      verify.add_column(v, lp.x[v], accum.data());
    }
  }
  double res_inf = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    res_inf = std::max(res_inf, std::fabs(accum[i] - b[i]));
  }
  if (res_inf <= opts.row_tolerance) {
    return verified_local(std::move(weights), b, "simplex");
  }
  verdict.outcome = PolytopeOutcome::kNonlocal;
  verdict.max_residual = res_inf;
  verdict.notes =
      format_note("simplex phase-1 optimum infeasible (L1 distance %.3e)",
                  lp.infeasibility_l1);
  return verdict;
}

// ---------------------------------------------------------------------------

PolytopeVerdict is_local_correlation_basis(const CorrelationTable& table,
                                           const PolytopeOptions& options) {
  LocalPolytopeChecker checker(table.n_parties(), options);
  return checker.check(table);
}

namespace {

// Probability-basis feasibility LP: rows are all (settings, outcome) cells
// plus one normalization row, columns are the deterministic strategies.
PolytopeVerdict is_local_probability_lp(const ProbabilityTable& table,
                                        const PolytopeOptions& options) {
  const int n = table.n_parties;
  const std::uint32_t n_settings = 1u << n;
  const std::size_t cells = static_cast<std::size_t>(n_settings) * n_settings;
  const std::size_t rows = cells + 1;
  const std::size_t cols = std::size_t{1} << (2 * n);

  std::vector<double> a(rows * cols, 0.0);
  for (std::uint32_t v = 0; v < cols; ++v) {
    const DeterministicStrategy st{v, n};
    for (std::uint32_t set = 0; set < n_settings; ++set) {
      const std::uint32_t o = strategy_outcome_index(st, set);
      a[((static_cast<std::size_t>(set) << n) + o) * cols + v] = 1.0;
    }
    a[cells * cols + v] = 1.0;
  }
  std::vector<double> b(rows);
  std::copy(table.values.begin(), table.values.end(), b.begin());
  b[cells] = 1.0;

  const auto lp = simplex_phase1(rows, cols, a, b, options.max_simplex_pivots);
  PolytopeVerdict verdict;
  if (!lp.optimal) {
    verdict.outcome = PolytopeOutcome::kIndeterminate;
    verdict.notes = "probability simplex reached the pivot cap";
    return verdict;
  }

  std::vector<std::pair<std::uint32_t, double>> weights;
  double total = 0.0;
  for (std::uint32_t v = 0; v < cols; ++v) {
    if (lp.x[v] > 0.0) {
      weights.emplace_back(v, lp.x[v]);
      total += lp.x[v];
    }
  }
  // Residual of the returned weights over all cells.
  std::vector<double> rebuilt(cells, 0.0);
  for (const auto& [code, w] : weights) {
    const DeterministicStrategy st{code, n};
    for (std::uint32_t set = 0; set < n_settings; ++set) {
      const std::uint32_t o = strategy_outcome_index(st, set);
      rebuilt[(static_cast<std::size_t>(set) << n) + o] += w;
    }
  }
  double res_inf = std::fabs(total - 1.0);
  for (std::size_t q = 0; q < cells; ++q) {
    res_inf = std::max(res_inf, std::fabs(rebuilt[q] - table.values[q]));
  }
  if (res_inf > options.row_tolerance) {
    verdict.outcome = PolytopeOutcome::kNonlocal;
    verdict.max_residual = res_inf;
    verdict.notes = format_note(
        "probability simplex phase-1 optimum infeasible (L1 distance %.3e)",
        lp.infeasibility_l1);
    return verdict;
  }
  if (total > 0.0 && std::fabs(total - 1.0) <= 1e-4) {
    double max_res = 0.0;
    for (auto& [code, w] : weights) w /= total;
    for (std::size_t q = 0; q < cells; ++q) {
      max_res = std::max(max_res, std::fabs(rebuilt[q] / total - table.values[q]));
    }
    if (max_res <= options.certificate_tolerance) {
      verdict.outcome = PolytopeOutcome::kLocal;
      verdict.weights = std::move(weights);
      verdict.max_residual = max_res;
      verdict.notes = "probability simplex";
      return verdict;
    }
    verdict.outcome = PolytopeOutcome::kIndeterminate;
    verdict.max_residual = max_res;
    verdict.notes = format_note(
        "probability simplex decomposition failed re-verification "
        "(max residual %.3e)",
        max_res);
    return verdict;
  }
  verdict.outcome = PolytopeOutcome::kIndeterminate;
  verdict.notes = "probability simplex weights rejected";
  return verdict;
}

}  // namespace

PolytopeVerdict is_local(const ProbabilityTable& table,
                         const PolytopeOptions& options) {
  table.validate();
  require_party_count(table.n_parties,
                      std::min(options.max_parties, kAbsoluteMaxParties),
                      "is_local");
  const int n = table.n_parties;
  if (n <= 4) return is_local_probability_lp(table, options);

  // Larger systems: reduce to the correlation basis.  The reduction drops
  // information exactly when the distribution signals, so reject those.
  const std::uint32_t n_settings = 1u << n;
  std::vector<std::vector<double>> coeff(n_settings);
  for (std::uint32_t set = 0; set < n_settings; ++set) {
    coeff[set].assign(table.values.begin() + (static_cast<std::size_t>(set) << n),
                      table.values.begin() +
                          ((static_cast<std::size_t>(set) + 1) << n));
    fast_walsh_hadamard(coeff[set]);
  }
  for (std::uint32_t mask = 0; mask < n_settings; ++mask) {
    for (std::uint32_t set = 0; set < n_settings; ++set) {
      const double ref = coeff[set & mask][mask];
      if (std::fabs(coeff[set][mask] - ref) > 1e-9) {
        throw usage_error(
            "distribution signals: subset correlations depend on settings "
            "outside the subset, so the correlation reduction would be lossy");
      }
    }
  }

  std::vector<double> corr(pow3(n));
  for (std::size_t idx = 0; idx < corr.size(); ++idx) {
    std::size_t rem = idx;
    std::uint32_t mask = 0;
    std::uint32_t set = 0;
    for (int k = 0; k < n; ++k) {
      const std::size_t t = rem % 3;
      rem /= 3;
      if (t != 0) mask |= 1u << k;
      if (t == 2) set |= 1u << k;
    }
    corr[idx] = coeff[set][mask];
  }
  LocalPolytopeChecker checker(n, options);
  return checker.check_vector(corr);
}

}  // namespace ghzbell
