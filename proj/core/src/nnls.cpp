#include "detail/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace ghzbell::detail {

namespace {

// Relative threshold below which a candidate column counts as linearly
// dependent on the active set (squared-norm deflation in the Cholesky
// append).
constexpr double kDependenceTol = 1e-12;
// Active weights at or below this are dropped during inner-loop pruning.
constexpr double kDropTol = 1e-14;
// Range for the number of columns appended per round before re-solving
// (scaled with the row count; see solve()).
constexpr std::size_t kMinBatch = 4;
constexpr std::size_t kMaxBatch = 32;

// Number of present parties of a base-3 subset index.
int subset_size(std::uint32_t t, int n) {
  int present = 0;
  for (int k = 0; k < n; ++k) {
    if (t % 3 != 0) ++present;
    t /= 3;
  }
  return present;
}

}  // namespace

NnlsMembership::NnlsMembership(int n_parties, RowSet row_set)
    : basis_(n_parties), row_set_(row_set) {
  const int n = n_parties;
  const std::size_t rows_full = basis_.rows();
  row_map_.reserve(rows_full);
  for (std::uint32_t t = 0; t < rows_full; ++t) {
    const int size = subset_size(t, n);
    bool keep = false;
    switch (row_set_) {
      case RowSet::kAll:
        keep = true;
        break;
      case RowSet::kEvenSizes:
        keep = size % 2 == 0;
        break;
      case RowSet::kEvenSizesPlusFull:
        keep = size % 2 == 0 || size == n;
        break;
      case RowSet::kPairsPlusFull:
        keep = size == 0 || size == 2 || size == n;
        break;
    }
    if (keep) row_map_.push_back(t);
  }
  m_ = row_map_.size();
  cap_ = m_ + 8;
  // The pair collapse is valid exactly when every selected subset size is
  // even, making columns invariant under the global outcome flip.
  collapsed_ = row_set_ == RowSet::kEvenSizes ||
               (row_set_ == RowSet::kPairsPlusFull && n % 2 == 0);
  scan_cols_ = collapsed_ ? basis_.columns() / 2 : basis_.columns();
  flip_mask_ = static_cast<std::uint32_t>(basis_.columns() - 1);

  cols_.resize(cap_ * m_);
  gram_.resize(cap_ * cap_);
  chol_.resize(cap_ * cap_);
  scores_.resize(basis_.columns());
  in_active_.resize(basis_.columns());
  resid_.resize(m_);
  if (row_set_ != RowSet::kAll) {
    embed_.assign(rows_full, 0.0);
    bred_.resize(m_);
    fullcol_.resize(rows_full);
  }
  vbuf_.resize(cap_);
}

double NnlsMembership::column_dot(std::uint32_t u, std::uint32_t v) const {
  // Per party, by the 2-bit chunk of u ^ v (00 = same outcomes, 11 = both
  // flipped):
  //   f  = 1 + o0 o0' + o1 o1'   sum over the three row states of a party
  //   ft = 1 - o0 o0' - o1 o1'   the same with present states negated
  //   g  =     o0 o0' + o1 o1'   present states only
  // Sums over whole row classes then factorize: all sizes = prod f, even
  // sizes = (prod f + prod ft) / 2, the full block = prod g, and pair rows
  // = e_2(g), the second elementary symmetric polynomial.
  static constexpr double kF[4] = {3.0, 1.0, 1.0, -1.0};
  static constexpr double kFt[4] = {-1.0, 1.0, 1.0, 3.0};
  static constexpr double kG[4] = {2.0, 0.0, 0.0, -2.0};
  double prod_f = 1.0;
  double prod_ft = 1.0;
  double prod_g = 1.0;
  double sum_g = 0.0;
  double sum_g2 = 0.0;
  std::uint32_t x = u ^ v;
  for (int k = 0; k < basis_.n_parties(); ++k) {
    const unsigned c = x & 3u;
    prod_f *= kF[c];
    prod_ft *= kFt[c];
    prod_g *= kG[c];
    sum_g += kG[c];
    sum_g2 += kG[c] * kG[c];
    x >>= 2;
  }
  switch (row_set_) {
    case RowSet::kAll:
      return prod_f;
    case RowSet::kEvenSizes:
      return 0.5 * (prod_f + prod_ft);
    case RowSet::kEvenSizesPlusFull:
      return 0.5 * (prod_f + prod_ft) + prod_g;
    case RowSet::kPairsPlusFull:
      return 1.0 + 0.5 * (sum_g * sum_g - sum_g2) + prod_g;
  }
  return prod_f;
}

void NnlsMembership::materialize_column(std::uint32_t v, double* dst) const {
  if (row_set_ == RowSet::kAll) {
    basis_.column(v, dst);
    return;
  }
  basis_.column(v, const_cast<double*>(fullcol_.data()));
  for (std::size_t i = 0; i < m_; ++i) dst[i] = fullcol_[row_map_[i]];
}

bool NnlsMembership::append_column(std::uint32_t v,
                                   const std::vector<double>& score_b) {
  const std::size_t k = active_.size();
  if (k >= cap_) return false;
  // New Gram row against the active columns.
  for (std::size_t j = 0; j < k; ++j) {
    gram_[j * cap_ + k] = gram_[k * cap_ + j] = column_dot(active_[j], v);
  }
  gram_[k * cap_ + k] = static_cast<double>(m_);  // columns have entries +-1

  // Extend the Cholesky factor: solve L l = g, lambda^2 = diag - |l|^2.
  double diag = gram_[k * cap_ + k];
  for (std::size_t i = 0; i < k; ++i) {
    double s = gram_[k * cap_ + i];  // g_i
    for (std::size_t j = 0; j < i; ++j) {
      s -= chol_[i * cap_ + j] * chol_[k * cap_ + j];
    }
    const double lij = s / chol_[i * cap_ + i];
    chol_[k * cap_ + i] = lij;
    diag -= lij * lij;
  }
  if (!(diag > kDependenceTol * static_cast<double>(m_))) {
    return false;  // dependent; leave active set unchanged
  }
  chol_[k * cap_ + k] = std::sqrt(diag);

  materialize_column(v, &cols_[k * m_]);
  active_.push_back(v);
  weight_.push_back(0.0);
  atb_.push_back(score_b[v]);
  in_active_[v] = 1;
  return true;
}

void NnlsMembership::remove_column(std::size_t idx) {
  const std::size_t k = active_.size();
  // Shift the stored columns, Gram rows/columns, and bookkeeping left.
  for (std::size_t j = idx + 1; j < k; ++j) {
    std::memcpy(&cols_[(j - 1) * m_], &cols_[j * m_], m_ * sizeof(double));
  }
  for (std::size_t r = 0; r < k; ++r) {
    std::memmove(&gram_[r * cap_ + idx], &gram_[r * cap_ + idx + 1],
                 (k - idx - 1) * sizeof(double));
  }
  for (std::size_t r = idx + 1; r < k; ++r) {
    std::memmove(&gram_[(r - 1) * cap_], &gram_[r * cap_],
                 (k - 1) * sizeof(double));
  }
  in_active_[active_[idx]] = 0;
  active_.erase(active_.begin() + idx);
  weight_.erase(weight_.begin() + idx);
  atb_.erase(atb_.begin() + idx);

  // Cholesky repair in O((k - idx)^2) instead of a full refactorization.
  // Deleting row/column idx leaves the leading block of L valid.  The
  // trailing rows with column idx removed form a lower-triangular M with
  // M M^T = G22 - v v^T, where v holds the removed column's sub-diagonal
  // entries, so a rank-one *update* by v restores the factor (updates, as
  // opposed to downdates, are unconditionally stable).
  const std::size_t kk = k - 1;
  for (std::size_t r = idx + 1; r < k; ++r) vbuf_[r - idx - 1] = chol_[r * cap_ + idx];
  for (std::size_t r = idx + 1; r < k; ++r) {
    double* dst = &chol_[(r - 1) * cap_];
    const double* src = &chol_[r * cap_];
    for (std::size_t c = 0; c < idx; ++c) dst[c] = src[c];
    for (std::size_t c = idx + 1; c <= r; ++c) dst[c - 1] = src[c];
  }
  for (std::size_t j = idx; j < kk; ++j) {
    const double ljj = chol_[j * cap_ + j];
    const double vj = vbuf_[j - idx];
    const double r = std::hypot(ljj, vj);
    const double c = ljj / r;
    const double s = vj / r;
    chol_[j * cap_ + j] = r;
    for (std::size_t i = j + 1; i < kk; ++i) {
      const double lij = chol_[i * cap_ + j];
      const double vi = vbuf_[i - idx];
      chol_[i * cap_ + j] = c * lij + s * vi;
      vbuf_[i - idx] = c * vi - s * lij;
    }
  }
  // Periodic full refactorization keeps rounding drift from accumulating
  // over long removal sequences; the Gram matrix is maintained exactly.
  if (++chol_mods_ >= 512) {
    rebuild_cholesky();
    chol_mods_ = 0;
  }
}

void NnlsMembership::rebuild_cholesky() {
  const std::size_t k = active_.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = gram_[i * cap_ + j];
      for (std::size_t t = 0; t < j; ++t) {
        s -= chol_[i * cap_ + t] * chol_[j * cap_ + t];
      }
      if (i == j) {
        chol_[i * cap_ + i] = std::sqrt(std::max(s, 1e-300));
      } else {
        chol_[i * cap_ + j] = s / chol_[j * cap_ + j];
      }
    }
  }
}

void NnlsMembership::solve_normal(std::vector<double>& z) const {
  const std::size_t k = active_.size();
  z.assign(k, 0.0);
  // Forward substitution L y = atb.
  for (std::size_t i = 0; i < k; ++i) {
    double s = atb_[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * cap_ + j] * z[j];
    z[i] = s / chol_[i * cap_ + i];
  }
  // Back substitution L^T z = y.
  for (std::size_t ii = k; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= chol_[j * cap_ + ii] * z[j];
    z[ii] = s / chol_[ii * cap_ + ii];
  }
}

NnlsMembership::Result NnlsMembership::solve(const std::vector<double>& b,
                                             double row_tolerance,
                                             long max_rounds) {
  Result result;
  for (std::uint32_t v : active_) in_active_[v] = 0;
  active_.clear();
  weight_.clear();
  atb_.clear();

  const bool projected = row_set_ != RowSet::kAll;
  const double* bp = b.data();
  if (projected) {
    for (std::size_t i = 0; i < m_; ++i) bred_[i] = b[row_map_[i]];
    bp = bred_.data();
  }

  // <column_v, b> for every v, reused for all Gram right-hand sides.  Under
  // a projection the scores are taken against the gathered b embedded in
  // zeros, i.e. against the projected problem.
  std::vector<double> score_b(basis_.columns());
  if (projected) {
    for (std::size_t i = 0; i < m_; ++i) embed_[row_map_[i]] = bred_[i];
    basis_.scores(embed_.data(), score_b.data());
  } else {
    basis_.scores(b.data(), score_b.data());
  }

  int batch = (basis_.n_parties() >= 4)
                  ? static_cast<int>(std::clamp<std::size_t>(m_ / 16, kMinBatch, kMaxBatch))
                  : 1;
  double prev_res2 = std::numeric_limits<double>::infinity();

  for (long round = 1; round <= max_rounds; ++round) {
    result.rounds = round;

    // Residual r = b - A_P w for the current feasible weights.
    std::copy(bp, bp + m_, resid_.begin());
    for (std::size_t j = 0; j < active_.size(); ++j) {
      const double w = weight_[j];
      if (w == 0.0) continue;
      const double* col = &cols_[j * m_];
      for (std::size_t i = 0; i < m_; ++i) resid_[i] -= w * col[i];
    }

    double res_inf = 0.0;
    double res_l1 = 0.0;
    double res2 = 0.0;
    double rb = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double v = resid_[i];
      res_inf = std::max(res_inf, std::fabs(v));
      res_l1 += std::fabs(v);
      res2 += v * v;
      rb += v * bp[i];
    }
    result.residual_inf = res_inf;

    if (res_inf <= row_tolerance) {
      result.status = Status::kInside;
      result.weights.clear();
      for (std::size_t j = 0; j < active_.size(); ++j) {
        if (weight_[j] <= 0.0) continue;
        if (collapsed_) {
          // Expand the flip-pair representative: an equal split cancels
          // every odd-size row of the full problem.
          result.weights.emplace_back(active_[j], 0.5 * weight_[j]);
          result.weights.emplace_back(active_[j] ^ flip_mask_, 0.5 * weight_[j]);
        } else {
          result.weights.emplace_back(active_[j], weight_[j]);
        }
      }
      return result;
    }

    // Exact scan of <r, column_v> over all strategies: used both for the
    // separation certificate and for column selection.  Under the pair
    // collapse both members score identically, so half the codes cover
    // every column.
    const double* rp = resid_.data();
    if (projected) {
      for (std::size_t i = 0; i < m_; ++i) embed_[row_map_[i]] = resid_[i];
      rp = embed_.data();
    }
    basis_.scores(rp, scores_.data());
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < scan_cols_; ++v) {
      if (scores_[v] > max_score) max_score = scores_[v];
    }

    const double certificate_margin =
        rb - max_score - row_tolerance * res_l1 - 1e-12 * (1.0 + res_l1);
    if (certificate_margin > 0.0) {
      result.status = Status::kOutside;
      result.margin = certificate_margin;
      // Always full-length (zero off the row set) so the certificate stays
      // checkable against the unprojected problem.
      result.certificate.assign(rp, rp + basis_.rows());
      return result;
    }

    // Cone optimality: no column has positive inner product with r.
    if (max_score <= 1e-12 * std::max(1.0, res_l1)) {
      result.status = Status::kBoundaryBand;
      return result;
    }

    // Select up to `batch` best strictly-improving inactive columns.  Near
    // support saturation the batch shrinks with the remaining row head-room
    // so speculative appends do not overshoot and churn.
    const std::size_t head_room =
        m_ > active_.size() ? m_ - active_.size() : std::size_t{1};
    const int eff_batch = static_cast<int>(
        std::clamp<std::size_t>((head_room + 1) / 2, 1, std::size_t(batch)));
    std::vector<std::pair<double, std::uint32_t>> picks;
    for (int pass = 0; pass < eff_batch; ++pass) picks.emplace_back(0.0, 0);
    // Maintain a small descending list of the top scores.
    for (std::size_t v = 0; v < scan_cols_; ++v) {
      const double s = scores_[v];
      if (s <= picks.back().first || in_active_[v]) continue;
      // Insert in descending order.
      for (std::size_t p = 0; p < picks.size(); ++p) {
        if (s > picks[p].first) {
          for (std::size_t q = picks.size() - 1; q > p; --q) picks[q] = picks[q - 1];
          picks[p] = {s, static_cast<std::uint32_t>(v)};
          break;
        }
      }
    }

    int appended = 0;
    for (const auto& [s, v] : picks) {
      if (s <= 1e-12 * std::max(1.0, res_l1)) break;
      if (append_column(v, score_b)) ++appended;
    }
    if (appended == 0) {
      if (batch > 1) {
        batch = 1;
        continue;
      }
      result.status = Status::kRoundLimit;
      return result;
    }

    // Lawson-Hanson inner loop: move toward the unconstrained solution on
    // the active set, pruning variables that would cross zero.
    for (int inner = 0; inner < 2000; ++inner) {
      solve_normal(zbuf_);
      bool all_positive = true;
      double alpha = 1.0;
      std::size_t blocker = active_.size();
      for (std::size_t j = 0; j < active_.size(); ++j) {
        if (zbuf_[j] <= 0.0) {
          all_positive = false;
          const double denom = weight_[j] - zbuf_[j];
          const double a = (denom > 0.0) ? weight_[j] / denom : 0.0;
          if (a < alpha) {
            alpha = a;
            blocker = j;
          }
        }
      }
      if (all_positive) {
        weight_ = zbuf_;
        break;
      }
      if (alpha <= 1e-14) {
        // Degenerate step: the blocking columns already have zero weight
        // (fresh batched appends whose unconstrained coefficients came out
        // nonpositive).  Drop every such column in one sweep -- highest
        // index first so earlier indices stay valid -- and re-solve once,
        // keeping the rest of the fresh columns alive.
        for (std::size_t j = active_.size(); j-- > 0;) {
          if (weight_[j] <= kDropTol && zbuf_[j] <= 0.0) remove_column(j);
        }
        if (active_.empty()) break;
        continue;
      }
      for (std::size_t j = 0; j < active_.size(); ++j) {
        weight_[j] += alpha * (zbuf_[j] - weight_[j]);
      }
      if (blocker < active_.size()) weight_[blocker] = 0.0;
      // Drop everything at (numerical) zero, highest index first so that
      // earlier indices stay valid.
      for (std::size_t j = active_.size(); j-- > 0;) {
        if (weight_[j] <= kDropTol) remove_column(j);
      }
      if (active_.empty()) break;
    }

    // Stall safeguard: if the squared residual stopped improving, tighten
    // the batch; with batch 1 the classical algorithm guarantees progress,
    // so a second stall means numerical exhaustion.
    if (res2 >= prev_res2 * (1.0 - 1e-14)) {
      if (batch > 1) {
        batch = 1;
      } else if (round > 8 && res2 >= prev_res2) {
        result.status = Status::kRoundLimit;
        return result;
      }
    }
    prev_res2 = res2;
  }
  result.status = Status::kRoundLimit;
  return result;
}

}  // namespace ghzbell::detail
