#include "ghzbell/inequalities.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "ghzbell/errors.hpp"
#include "ghzbell/polytope.hpp"
#include "ghzbell/walsh.hpp"

namespace ghzbell {

namespace {

constexpr int kMabkPartyCap = 16;
constexpr int kBetaPartyCap = 20;
constexpr int kWwzbPartyCap = 24;
constexpr int kEnumeratePartyCap = 4;

// Above this table size the dyadic-convolution path beats the double loop.
constexpr std::uint32_t kMabkFastThreshold = 32;

void check_parties(int n, int cap, const char* what) {
  if (n < 1) throw usage_error(std::string(what) + ": party count must be >= 1");
  if (n > cap) {
    throw resource_error(std::string(what) + ": " + std::to_string(n) +
                         " parties exceeds the cap of " + std::to_string(cap));
  }
}

std::vector<double> beta_by_count(int n) {
  std::vector<double> beta(n + 1);
  for (int s = 0; s <= n; ++s) beta[s] = mabk_beta(s, n);
  return beta;
}

double signed_family_sum(const CorrelationTable& table, std::uint32_t mask) {
  const int n = table.n_parties();
  const std::vector<double> beta = beta_by_count(n);
  const std::uint32_t size = table.n_settings();
  double sum = 0.0;
  for (std::uint32_t s = 0; s < size; ++s) {
    sum += beta[std::popcount(s ^ mask)] * table.full(s);
  }
  return sum;
}

}  // namespace

const char* to_string(InequalityClass c) {
  switch (c) {
    case InequalityClass::kS1: return "s1";
    case InequalityClass::kS1S2: return "s1s2";
    case InequalityClass::kChsh4: return "chsh4";
    case InequalityClass::kMabk: return "mabk";
    case InequalityClass::kWwzb: return "wwzb";
    case InequalityClass::kCompleteSet: return "complete";
  }
  return "unknown";
}

double mabk_beta(int s, int n) {
  check_parties(n, kBetaPartyCap, "mabk_beta");
  if (s < 0 || s > n) {
    throw usage_error("mabk_beta: raised-setting count must lie in [0, N]");
  }
  const double scale = std::pow(2.0, 0.5 * (n + 1));
  return scale * std::cos(std::numbers::pi * 0.25 * (1 + n - 2 * s));
}

double mabk_beta_bruteforce(std::uint32_t settings, int n) {
  check_parties(n, kBetaPartyCap, "mabk_beta_bruteforce");
  const double quarter_pi = std::numbers::pi * 0.25;
  const double sqrt2 = std::numbers::sqrt2;
  double sum = 0.0;
  const std::uint32_t size = 1u << n;
  for (std::uint32_t a_bits = 0; a_bits < size; ++a_bits) {
    // a_j = +1 for bit 0, -1 for bit 1; sum_j a_j = N - 2 popcount.
    const int a_sum = n - 2 * std::popcount(a_bits);
    // prod_l a_l^{s_l} = (-1)^{popcount(a & s)}.
    const double sign = (std::popcount(a_bits & settings) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * sqrt2 * std::cos(quarter_pi * (n + 1 - a_sum));
  }
  return sum;
}

double evaluate_s1(const CorrelationTable& table) {
  return std::fabs(signed_family_sum(table, 0));
}

double evaluate_s2(const CorrelationTable& table) {
  const std::uint32_t all = table.n_settings() - 1u;
  return std::fabs(signed_family_sum(table, all));
}

std::vector<double> mabk_family_values_naive(const CorrelationTable& table) {
  const int n = table.n_parties();
  check_parties(n, kMabkPartyCap, "mabk_family_values");
  const std::uint32_t size = table.n_settings();
  const std::vector<double> beta = beta_by_count(n);
  std::vector<double> values(size);
  for (std::uint32_t mask = 0; mask < size; ++mask) {
    double sum = 0.0;
    for (std::uint32_t s = 0; s < size; ++s) {
      sum += beta[std::popcount(s ^ mask)] * table.full(s);
    }
    values[mask] = std::fabs(sum);
  }
  return values;
}

std::vector<double> mabk_family_values(const CorrelationTable& table) {
  const int n = table.n_parties();
  check_parties(n, kMabkPartyCap, "mabk_family_values");
  const std::uint32_t size = table.n_settings();
  if (size < kMabkFastThreshold) return mabk_family_values_naive(table);

  // values[mask] = sum_s beta(popcount(s ^ mask)) E(s) is a dyadic
  // convolution, diagonalized by the Walsh-Hadamard transform.
  const std::vector<double> beta = beta_by_count(n);
  std::vector<double> kernel(size);
  for (std::uint32_t t = 0; t < size; ++t) kernel[t] = beta[std::popcount(t)];
  std::vector<double> values(table.full_values());
  fast_walsh_hadamard(kernel);
  fast_walsh_hadamard(values);
  const double inv = 1.0 / static_cast<double>(size);
  for (std::uint32_t y = 0; y < size; ++y) values[y] *= kernel[y] * inv;
  fast_walsh_hadamard(values);
  for (std::uint32_t m = 0; m < size; ++m) values[m] = std::fabs(values[m]);
  return values;
}

InequalityVerdict evaluate_mabk_all(const CorrelationTable& table) {
  const std::vector<double> values = mabk_family_values(table);
  InequalityVerdict verdict;
  verdict.classical_bound = static_cast<double>(table.n_settings());
  for (std::uint32_t m = 0; m < values.size(); ++m) {
    if (values[m] > verdict.best_value) {
      verdict.best_value = values[m];
      verdict.witness = m;
    }
  }
  verdict.violated = verdict.best_value > verdict.classical_bound + kViolationGuard;
  return verdict;
}

InequalityVerdict evaluate_chsh4(const CorrelationTable& table) {
  if (table.n_parties() != 2) {
    throw usage_error("the CHSH combinations are defined for exactly 2 parties");
  }
  InequalityVerdict verdict;
  verdict.classical_bound = 2.0;
  for (std::uint32_t neg = 0; neg < 4; ++neg) {
    double sum = 0.0;
    for (std::uint32_t s = 0; s < 4; ++s) {
      sum += (s == neg ? -1.0 : 1.0) * table.full(s);
    }
    const double value = std::fabs(sum);
    if (value > verdict.best_value) {
      verdict.best_value = value;
      verdict.witness = neg;
    }
  }
  verdict.violated = verdict.best_value > verdict.classical_bound + kViolationGuard;
  return verdict;
}

InequalityVerdict evaluate_wwzb(const CorrelationTable& table) {
  const int n = table.n_parties();
  check_parties(n, kWwzbPartyCap, "evaluate_wwzb");
  std::vector<double> transformed(table.full_values());
  fast_walsh_hadamard(transformed);
  double sum = 0.0;
  for (double v : transformed) sum += std::fabs(v);
  InequalityVerdict verdict;
  verdict.best_value = sum;
  verdict.classical_bound = static_cast<double>(table.n_settings());
  verdict.witness = 0;
  verdict.violated = sum > verdict.classical_bound + kViolationGuard;
  return verdict;
}

std::vector<std::vector<double>> enumerate_mabk_class(int n) {
  check_parties(n, kEnumeratePartyCap, "enumerate_mabk_class");
  const std::uint32_t size = 1u << n;
  std::vector<double> base(size);
  {
    const std::vector<double> beta = beta_by_count(n);
    for (std::uint32_t s = 0; s < size; ++s) base[s] = beta[std::popcount(s)];
  }

  std::vector<int> perm(n);
  for (int k = 0; k < n; ++k) perm[k] = k;

  std::set<std::vector<double>> canon;
  do {
    std::vector<double> permuted(size);
    for (std::uint32_t s = 0; s < size; ++s) {
      // Party k of the transformed tensor reads party perm[k] of the base.
      std::uint32_t src = 0;
      for (int k = 0; k < n; ++k) {
        if ((s >> k) & 1u) src |= 1u << perm[k];
      }
      permuted[s] = base[src];
    }
    for (std::uint32_t flip = 0; flip < size; ++flip) {
      // Outcome relabelings: per party and per setting, flipping both
      // outcomes of device (k, j) negates every coefficient with s_k = j.
      for (std::uint32_t neg0 = 0; neg0 < size; ++neg0) {
        for (std::uint32_t neg1 = 0; neg1 < size; ++neg1) {
          std::vector<double> tensor(size);
          for (std::uint32_t s = 0; s < size; ++s) {
            const std::uint32_t flipped = s ^ flip;
            const int minus = std::popcount(~flipped & neg0 & (size - 1)) +
                              std::popcount(flipped & neg1);
            tensor[s] = ((minus & 1) ? -1.0 : 1.0) * permuted[flipped];
          }
          std::vector<double> negated(size);
          for (std::uint32_t s = 0; s < size; ++s) negated[s] = -tensor[s];
          canon.insert(std::min(tensor, negated));
        }
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  // Party permutations leave the popcount kernel invariant, so they are
  // explored above only for completeness; the set already deduplicates.
  return {canon.begin(), canon.end()};
}

InequalityVerdict check_violation(const CorrelationTable& table,
                                  InequalityClass cls) {
  switch (cls) {
    case InequalityClass::kS1: {
      InequalityVerdict v;
      v.best_value = evaluate_s1(table);
      v.classical_bound = static_cast<double>(table.n_settings());
      v.witness = 0;
      v.violated = v.best_value > v.classical_bound + kViolationGuard;
      return v;
    }
    case InequalityClass::kS1S2: {
      InequalityVerdict v;
      const double s1 = evaluate_s1(table);
      const double s2 = evaluate_s2(table);
      v.best_value = std::max(s1, s2);
      v.witness = (s2 > s1) ? table.n_settings() - 1u : 0u;
      v.classical_bound = static_cast<double>(table.n_settings());
      v.violated = v.best_value > v.classical_bound + kViolationGuard;
      return v;
    }
    case InequalityClass::kChsh4:
      return evaluate_chsh4(table);
    case InequalityClass::kMabk:
      return evaluate_mabk_all(table);
    case InequalityClass::kWwzb:
      return evaluate_wwzb(table);
    case InequalityClass::kCompleteSet: {
      const PolytopeVerdict pv = is_local_correlation_basis(table);
      if (pv.outcome == PolytopeOutcome::kIndeterminate) {
        throw consistency_error(
            "local polytope membership could not be decided for this table");
      }
      InequalityVerdict v;
      v.violated = pv.outcome == PolytopeOutcome::kNonlocal;
      v.best_value = pv.max_residual;
      v.classical_bound = 0.0;
      v.witness = 0;
      return v;
    }
  }
  throw usage_error("unknown inequality class");
}

}  // namespace ghzbell
