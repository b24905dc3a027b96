#ifndef GHZBELL_CORRELATIONS_HPP
#define GHZBELL_CORRELATIONS_HPP

#include <cstdint>
#include <vector>

#include "ghzbell/measurement.hpp"

namespace ghzbell {

// ---------------------------------------------------------------------------
// Index encodings (public contract, used consistently across the library)
//
// Parties are numbered 0 .. N-1.  All encodings are little-endian in the
// party index:
//
//   * A joint setting choice s = (s_0, ..., s_{N-1}), s_k in {0,1}, is the
//     integer sum_k s_k * 2^k ("settings index").
//   * A joint outcome o = (o_0, ..., o_{N-1}), o_k in {+1,-1}, is encoded by
//     bits b_k with o_k = +1 <-> b_k = 0, as the integer sum_k b_k * 2^k
//     ("outcome index").
//   * A subset K of parties is the bitmask sum_{k in K} 2^k.
//   * A (subset, settings-on-subset) pair is the base-3 integer
//     sum_k t_k * 3^k with trit t_k = 0 if party k is absent from K,
//     t_k = 1 if s_k = 0, and t_k = 2 if s_k = 1 ("subset index").
// ---------------------------------------------------------------------------

// Correlation data for one measurement configuration.
//
// `full` always holds the 2^N full-correlation values E(s) indexed by the
// settings index.  When built with Scope::kWithRestricted the table also
// holds E_K(s|_K) for every proper subset K (including the empty set, whose
// value is fixed at 1), addressed by the subset index.
class CorrelationTable {
 public:
  enum class Scope { kFullOnly, kWithRestricted };

  CorrelationTable() = default;

  // Assembles a table from raw values (used by the empirical-estimation
  // path; entries must lie in [-1, 1] but need not satisfy any parity rule).
  // `full` must have size 2^n.  For kWithRestricted, `restricted` must have
  // size 3^n; its entries at full-support and empty-support indices are
  // ignored and replaced by `full` / by 1.
  CorrelationTable(int n_parties, std::vector<double> full);
  CorrelationTable(int n_parties, std::vector<double> full,
                   std::vector<double> restricted);

  int n_parties() const { return n_parties_; }
  Scope scope() const { return scope_; }
  bool has_restricted() const { return scope_ == Scope::kWithRestricted; }

  std::uint32_t n_settings() const { return 1u << n_parties_; }

  // E(s) for the full party set, by settings index.
  double full(std::uint32_t settings) const { return full_[settings]; }
  const std::vector<double>& full_values() const { return full_; }

  // E_K(s|_K) by subset bitmask and settings index (bits outside K are
  // ignored).  Requires has_restricted() unless K is empty or complete.
  double restricted(std::uint32_t subset_mask, std::uint32_t settings) const;

  // E_K addressed by the base-3 subset index described above.  Requires
  // has_restricted().  Index 0 returns 1; full-support indices return the
  // corresponding `full` entry.
  double by_subset_index(std::uint32_t subset_index) const;

  // The length-3^N vector of all subset correlations in subset-index order.
  // Requires has_restricted().
  std::vector<double> correlation_vector() const;

 private:
  int n_parties_ = 0;
  Scope scope_ = Scope::kFullOnly;
  std::vector<double> full_;        // size 2^N
  std::vector<double> restricted_;  // size 3^N when scope is kWithRestricted
};

// Conditional outcome distributions for one configuration: values[q] with
// q = settings_index * 2^N + outcome_index is p(o | s).
struct ProbabilityTable {
  int n_parties = 0;
  std::vector<double> values;

  std::uint32_t n_settings() const { return 1u << n_parties; }
  double p(std::uint32_t settings, std::uint32_t outcome) const {
    return values[(static_cast<std::size_t>(settings) << n_parties) + outcome];
  }

  // Throws usage_error if any entry is outside [0,1] by more than tol or a
  // per-setting sum differs from 1 by more than tol.
  void validate(double tol = 1e-9) const;
};

// Size caps for exact table construction; exceeding them raises
// resource_error before any allocation happens.
struct TableLimits {
  int max_parties_full = 16;
  int max_parties_restricted = 8;
};

// Full N-party correlation E(s) of the N-qubit GHZ state measured along the
// configured directions, after applying `noise` to every qubit:
//
//   E(s) = g^N cos(sum_k phi_k(s_k)) prod_k sin(theta_k(s_k))
//        + d^N delta_N prod_k cos(theta_k(s_k))
//
// where delta_N is 1 for even N and 0 for odd N, and (g, d) are
// (1-nu, 1-nu) for depolarizing noise, (1-nu, 1) for dephasing, (1, 1) for
// none.
double ghz_full_correlation(const MeasurementConfig& config,
                            const NoiseSpec& noise, std::uint32_t settings);

// Correlation restricted to the proper subset K (given as a bitmask):
//
//   E_K(s|_K) = d^|K| delta_|K| prod_{k in K} cos(theta_k(s_k))
//
// with d = 1-nu for depolarizing noise and d = 1 otherwise.  The empty
// subset yields 1.  Requires K to be a proper subset of the full party set.
double ghz_restricted_correlation(const MeasurementConfig& config,
                                  const NoiseSpec& noise,
                                  std::uint32_t subset_mask,
                                  std::uint32_t settings);

// Evaluates every entry of the correlation table for `config` under `noise`.
CorrelationTable build_correlation_table(
    const MeasurementConfig& config, const NoiseSpec& noise,
    CorrelationTable::Scope scope = CorrelationTable::Scope::kFullOnly,
    const TableLimits& limits = {});

// Inverts the correlation expansion to conditional outcome probabilities,
//
//   p(o | s) = 2^-N sum_{K subseteq parties} E_K(s|_K) prod_{k in K} o_k.
//
// Requires a table with restricted entries.  Entries that undershoot 0 or
// overshoot 1 by at most 1e-9 (floating-point slack) are clamped; larger
// excursions, or per-setting sums off from 1 by more than 1e-9, raise
// consistency_error.
ProbabilityTable correlation_table_to_probabilities(const CorrelationTable& table);

// Two-qubit Bell-state correlation in spherical angles:
//
//   E = cos(theta1) cos(theta2) + sin(theta1) sin(theta2) cos(phi1 + phi2).
double bell_state_correlation(double theta1, double phi1, double theta2,
                              double phi2);

}  // namespace ghzbell

#endif  // GHZBELL_CORRELATIONS_HPP
