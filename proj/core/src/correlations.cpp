#include "ghzbell/correlations.hpp"

#include <bit>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "ghzbell/errors.hpp"
#include "ghzbell/walsh.hpp"

namespace ghzbell {

namespace {

// Per-party trigonometric data for both settings, precomputed once per table.
struct PartyTrig {
  double sin_theta[2];
  double cos_theta[2];
  double phi[2];
};

PartyTrig party_trig(const MeasurementConfig& config, int party) {
  PartyTrig t;
  for (int s = 0; s < 2; ++s) {
    const MeasurementDirection& d = config.direction(party, s);
    // For unit vectors hypot(x, y) = sin(theta) >= 0 and z = cos(theta).
    t.sin_theta[s] = std::hypot(d.x, d.y);
    t.cos_theta[s] = d.z;
    t.phi[s] = d.azimuth();
  }
  return t;
}

// Noise attenuation factors: the phase-coherent term of a correlation over a
// set of size m is scaled by coherent^m, the z-product term by diagonal^m.
struct NoiseFactors {
  double coherent = 1.0;
  double diagonal = 1.0;
};

NoiseFactors noise_factors(const NoiseSpec& noise) {
  switch (noise.kind) {
    case NoiseKind::kNone:
      return {1.0, 1.0};
    case NoiseKind::kDepolarizing:
      return {1.0 - noise.nu, 1.0 - noise.nu};
    case NoiseKind::kDephasing:
      return {1.0 - noise.nu, 1.0};
  }
  return {1.0, 1.0};
}

inline double parity_delta(int m) { return (m % 2 == 0) ? 1.0 : 0.0; }

std::size_t pow3(int n) {
  std::size_t r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

void check_full_cap(int n, const TableLimits& limits) {
  if (n > limits.max_parties_full) {
    throw resource_error("full correlation table for " + std::to_string(n) +
                         " parties exceeds the cap of " +
                         std::to_string(limits.max_parties_full));
  }
}

void check_restricted_cap(int n, const TableLimits& limits) {
  if (n > limits.max_parties_restricted) {
    throw resource_error("restricted correlation table for " + std::to_string(n) +
                         " parties exceeds the cap of " +
                         std::to_string(limits.max_parties_restricted));
  }
}

void check_entry_range(double v, const char* what) {
  if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) {
    throw usage_error(std::string(what) + " entries must lie in [-1, 1]");
  }
}

}  // namespace

// --- CorrelationTable --------------------------------------------------------

CorrelationTable::CorrelationTable(int n_parties, std::vector<double> full)
    : n_parties_(n_parties), scope_(Scope::kFullOnly), full_(std::move(full)) {
  if (n_parties_ < 1) throw usage_error("correlation table needs at least one party");
  if (full_.size() != (std::size_t{1} << n_parties_)) {
    throw usage_error("full correlation array must have 2^N entries");
  }
  for (double v : full_) check_entry_range(v, "full correlation");
}

CorrelationTable::CorrelationTable(int n_parties, std::vector<double> full,
                                   std::vector<double> restricted)
    : CorrelationTable(n_parties, std::move(full)) {
  scope_ = Scope::kWithRestricted;
  restricted_ = std::move(restricted);
  if (restricted_.size() != pow3(n_parties_)) {
    throw usage_error("restricted correlation array must have 3^N entries");
  }
  for (double v : restricted_) check_entry_range(v, "restricted correlation");
  // Normalize the redundant slots so that by_subset_index() has one source
  // of truth per entry: the empty set is 1, full support mirrors `full`.
  restricted_[0] = 1.0;
  const std::uint32_t n_settings = 1u << n_parties_;
  for (std::uint32_t s = 0; s < n_settings; ++s) {
    std::size_t idx = 0;
    std::size_t base = 1;
    for (int k = 0; k < n_parties_; ++k) {
      idx += base * (1 + ((s >> k) & 1u));
      base *= 3;
    }
    restricted_[idx] = full_[s];
  }
}

double CorrelationTable::restricted(std::uint32_t subset_mask,
                                    std::uint32_t settings) const {
  const std::uint32_t all = (1u << n_parties_) - 1u;
  if (subset_mask == 0) return 1.0;
  if (subset_mask == all) return full_[settings & all];
  if (!has_restricted()) {
    throw usage_error("table was built without restricted correlations");
  }
  std::size_t idx = 0;
  std::size_t base = 1;
  for (int k = 0; k < n_parties_; ++k) {
    if ((subset_mask >> k) & 1u) idx += base * (1 + ((settings >> k) & 1u));
    base *= 3;
  }
  return restricted_[idx];
}

double CorrelationTable::by_subset_index(std::uint32_t subset_index) const {
  if (!has_restricted()) {
    throw usage_error("table was built without restricted correlations");
  }
  return restricted_[subset_index];
}

std::vector<double> CorrelationTable::correlation_vector() const {
  if (!has_restricted()) {
    throw usage_error("table was built without restricted correlations");
  }
  return restricted_;
}

// --- ProbabilityTable --------------------------------------------------------

void ProbabilityTable::validate(double tol) const {
  if (n_parties < 1) throw usage_error("probability table needs at least one party");
  const std::size_t block = std::size_t{1} << n_parties;
  if (values.size() != block * block) {
    throw usage_error("probability table must have 4^N entries");
  }
  for (std::uint32_t s = 0; s < block; ++s) {
    double sum = 0.0;
    for (std::uint32_t o = 0; o < block; ++o) {
      const double v = values[(static_cast<std::size_t>(s) << n_parties) + o];
      if (!(v >= -tol && v <= 1.0 + tol)) {
        throw usage_error("probability entry outside [0, 1]");
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > tol) {
      throw usage_error("probabilities for one setting do not sum to 1");
    }
  }
}

// --- GHZ correlations --------------------------------------------------------

double ghz_full_correlation(const MeasurementConfig& config, const NoiseSpec& noise,
                            std::uint32_t settings) {
  config.validate();
  noise.validate();
  const int n = config.n_parties;
  const NoiseFactors nf = noise_factors(noise);

  double phi_sum = 0.0;
  double sin_prod = 1.0;
  double cos_prod = 1.0;
  for (int k = 0; k < n; ++k) {
    const int s = (settings >> k) & 1u;
    const PartyTrig t = party_trig(config, k);
    phi_sum += t.phi[s];
    sin_prod *= t.sin_theta[s];
    cos_prod *= t.cos_theta[s];
  }
  const double coherent = std::pow(nf.coherent, n) * std::cos(phi_sum) * sin_prod;
  const double diagonal = std::pow(nf.diagonal, n) * parity_delta(n) * cos_prod;
  return coherent + diagonal;
}

double ghz_restricted_correlation(const MeasurementConfig& config,
                                  const NoiseSpec& noise, std::uint32_t subset_mask,
                                  std::uint32_t settings) {
  config.validate();
  noise.validate();
  const int n = config.n_parties;
  const std::uint32_t all = (1u << n) - 1u;
  if ((subset_mask & ~all) != 0 || subset_mask == all) {
    throw usage_error("restricted correlation requires a proper subset of parties");
  }
  if (subset_mask == 0) return 1.0;

  const int m = std::popcount(subset_mask);
  if (m % 2 != 0) return 0.0;

  const NoiseFactors nf = noise_factors(noise);
  double cos_prod = 1.0;
  for (int k = 0; k < n; ++k) {
    if (!((subset_mask >> k) & 1u)) continue;
    const int s = (settings >> k) & 1u;
    cos_prod *= config.direction(k, s).z;
  }
  return std::pow(nf.diagonal, m) * cos_prod;
}

CorrelationTable build_correlation_table(const MeasurementConfig& config,
                                         const NoiseSpec& noise,
                                         CorrelationTable::Scope scope,
                                         const TableLimits& limits) {
  config.validate();
  noise.validate();
  const int n = config.n_parties;
  check_full_cap(n, limits);
  if (scope == CorrelationTable::Scope::kWithRestricted) check_restricted_cap(n, limits);

  const NoiseFactors nf = noise_factors(noise);
  std::vector<PartyTrig> trig(n);
  for (int k = 0; k < n; ++k) trig[k] = party_trig(config, k);

  const std::uint32_t n_settings = 1u << n;
  std::vector<double> full(n_settings);
  const double coh_scale = std::pow(nf.coherent, n);
  const double dia_scale = std::pow(nf.diagonal, n) * parity_delta(n);
  for (std::uint32_t s = 0; s < n_settings; ++s) {
    double phi_sum = 0.0;
    double sin_prod = 1.0;
    double cos_prod = 1.0;
    for (int k = 0; k < n; ++k) {
      const int bit = (s >> k) & 1u;
      phi_sum += trig[k].phi[bit];
      sin_prod *= trig[k].sin_theta[bit];
      cos_prod *= trig[k].cos_theta[bit];
    }
    full[s] = coh_scale * std::cos(phi_sum) * sin_prod + dia_scale * cos_prod;
  }

  if (scope == CorrelationTable::Scope::kFullOnly) {
    return CorrelationTable(n, std::move(full));
  }

  // Walk all 3^N subset indices with an odometer over trits; carry the
  // subset size, the cos(theta) product, and the diagonal noise power along.
  const std::size_t n_subsets = pow3(n);
  std::vector<double> restricted(n_subsets, 0.0);
  std::vector<int> trits(n, 0);
  double cos_prod = 1.0;
  int subset_size = 0;
  std::vector<double> dia_pow(n + 1);
  dia_pow[0] = 1.0;
  for (int m = 1; m <= n; ++m) dia_pow[m] = dia_pow[m - 1] * nf.diagonal;

  for (std::size_t idx = 0;; ++idx) {
    restricted[idx] =
        (subset_size % 2 == 0) ? dia_pow[subset_size] * cos_prod : 0.0;
    // Advance the odometer, maintaining the running product incrementally.
    int k = 0;
    for (; k < n; ++k) {
      if (trits[k] == 0) {
        trits[k] = 1;
        ++subset_size;
        cos_prod *= trig[k].cos_theta[0];
        break;
      }
      if (trits[k] == 1) {
        trits[k] = 2;
        // Replace cos(theta_k(0)) by cos(theta_k(1)); recompute to avoid
        // dividing by a zero factor.
        cos_prod = 1.0;
        for (int j = 0; j < n; ++j) {
          if (trits[j] != 0) cos_prod *= trig[j].cos_theta[trits[j] - 1];
        }
        break;
      }
      trits[k] = 0;
      --subset_size;
      cos_prod = 1.0;
      for (int j = 0; j < n; ++j) {
        if (trits[j] != 0) cos_prod *= trig[j].cos_theta[trits[j] - 1];
      }
    }
    if (k == n) break;
  }

  return CorrelationTable(n, std::move(full), std::move(restricted));
}

ProbabilityTable correlation_table_to_probabilities(const CorrelationTable& table) {
  if (!table.has_restricted()) {
    throw usage_error(
        "probability inversion needs a table with restricted correlations");
  }
  const int n = table.n_parties();
  const std::uint32_t block = 1u << n;
  const double inv = 1.0 / static_cast<double>(block);

  ProbabilityTable result;
  result.n_parties = n;
  result.values.resize(static_cast<std::size_t>(block) * block);

  std::vector<double> coeff(block);
  for (std::uint32_t s = 0; s < block; ++s) {
    // coeff[K] = E_K(s|_K); the expansion over outcomes is then a
    // Walsh-Hadamard transform because prod_{k in K} o_k = (-1)^|K & o|.
    for (std::uint32_t K = 0; K < block; ++K) {
      coeff[K] = table.restricted(K, s);
    }
    fast_walsh_hadamard(coeff);
    double sum = 0.0;
    for (std::uint32_t o = 0; o < block; ++o) {
      double p = inv * coeff[o];
      if (p < 0.0) {
        if (p < -1e-9) {
          throw consistency_error(
              "probability inversion produced a negative probability: " +
              std::to_string(p));
        }
        p = 0.0;
      } else if (p > 1.0) {
        if (p > 1.0 + 1e-9) {
          throw consistency_error(
              "probability inversion produced a probability above 1: " +
              std::to_string(p));
        }
        p = 1.0;
      }
      result.values[(static_cast<std::size_t>(s) << n) + o] = p;
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw consistency_error(
          "inverted probabilities for one setting sum to " + std::to_string(sum));
    }
  }
  return result;
}

double bell_state_correlation(double theta1, double phi1, double theta2,
                              double phi2) {
  return std::cos(theta1) * std::cos(theta2) +
         std::sin(theta1) * std::sin(theta2) * std::cos(phi1 + phi2);
}

}  // namespace ghzbell
