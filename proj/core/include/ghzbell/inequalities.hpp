#ifndef GHZBELL_INEQUALITIES_HPP
#define GHZBELL_INEQUALITIES_HPP

#include <cstdint>
#include <vector>

#include "ghzbell/correlations.hpp"

namespace ghzbell {

// Families of tests applied to a correlation table.  CompleteSet means exact
// membership in the local polytope (dispatched to the polytope module).
enum class InequalityClass : std::uint8_t {
  kS1 = 0,         // the single N-party parity inequality, identity flip mask
  kS1S2 = 1,       // the pair {S1, S2} (S2 = all settings flipped)
  kChsh4 = 2,      // the four CHSH combinations (N = 2 only)
  kMabk = 3,       // the full family of 2^N setting-flip variants
  kWwzb = 4,       // all 2^(2^N) full-correlation inequalities via transform
  kCompleteSet = 5 // local polytope membership
};

const char* to_string(InequalityClass c);

// Margin added to a classical bound before declaring violation, guarding
// against floating-point ties.
inline constexpr double kViolationGuard = 1e-9;

struct InequalityVerdict {
  bool violated = false;
  double best_value = 0.0;      // largest |S| over the family tested
  double classical_bound = 0.0; // local-hidden-variable bound for one member
  // Which family member attains best_value: the setting-flip mask for the
  // MABK family (0 = S1, all-ones = S2), the index of the negated setting
  // pair for the CHSH forms, 0 when the family has a single effective member
  // (WWZB sum, complete set).
  std::uint32_t witness = 0;
};

// Coefficient of E(s) in the N-party parity (MABK) inequality, as a function
// of the number of raised settings s = popcount(settings):
//
//   beta(s, N) = 2^{(N+1)/2} cos(pi/4 * (1 + N - 2 s)).
//
// Values are exact multiples of 2^{k} or 2^{k}/sqrt(2); n <= 20.
double mabk_beta(int s, int n);

// The same coefficient evaluated by brute-force summation over all 2^N
// outcome sign patterns,
//
//   beta(settings) = sum_{a in {-1,1}^N} sqrt(2) cos(pi/4 (N + 1 - sum_j a_j))
//                    prod_l a_l^{s_l},
//
// used as an oracle for mabk_beta; n <= 20.
double mabk_beta_bruteforce(std::uint32_t settings, int n);

// S1 = |sum_s beta(popcount(s), N) E(s)| and its setting-reflected partner
// S2 = |sum_s beta(N - popcount(s), N) E(s)|.
double evaluate_s1(const CorrelationTable& table);
double evaluate_s2(const CorrelationTable& table);

// |sum_s beta(popcount(s XOR mask), N) E(s)| for every flip mask at once.
// Returned vector is indexed by mask; values[0] = S1, values.back() = S2.
// Uses the fast dyadic-convolution path for larger tables; n <= 16.
std::vector<double> mabk_family_values(const CorrelationTable& table);

// Same values computed by the direct popcount-of-XOR double loop; the
// reference implementation the fast path is checked against.
std::vector<double> mabk_family_values_naive(const CorrelationTable& table);

// Verdict over the full MABK family (classical bound 2^N per member).
InequalityVerdict evaluate_mabk_all(const CorrelationTable& table);

// The four CHSH combinations |E(00) +- E(01) +- E(10) +- E(11)| with exactly
// one minus sign; classical bound 2.  The witness is the settings index of
// the negated term.  N = 2 only.
InequalityVerdict evaluate_chsh4(const CorrelationTable& table);

// The full-correlation test
//
//   S = sum_{a in {-1,1}^N} |sum_s prod_k a_k^{s_k} E(s)|,
//
// equal to the L1 norm of the Walsh-Hadamard transform of E; the table's
// full correlations admit a local model if and only if S <= 2^N.  n <= 24.
InequalityVerdict evaluate_wwzb(const CorrelationTable& table);

// All distinct coefficient tensors obtained from the N-party parity
// inequality by permuting parties, relabeling settings, and relabeling
// outcomes, canonicalized up to overall sign (lexicographically smallest of
// tensor/-tensor, entries in settings-index order).  n <= 4 (the count is
// 2^N: 4 for N=2, 8 for N=3).
std::vector<std::vector<double>> enumerate_mabk_class(int n);

// Evaluates `cls` on the table.  Inequality classes use the evaluators
// above.  kCompleteSet requires a table with restricted correlations and is
// answered by the local polytope module (see polytope.hpp for options); a
// table that cannot be decided raises consistency_error here, so estimation
// code that must count indeterminates calls the polytope API directly.
InequalityVerdict check_violation(const CorrelationTable& table,
                                  InequalityClass cls);

}  // namespace ghzbell

#endif  // GHZBELL_INEQUALITIES_HPP
