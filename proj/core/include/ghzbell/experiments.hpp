#ifndef GHZBELL_EXPERIMENTS_HPP
#define GHZBELL_EXPERIMENTS_HPP

#include <cstdint>
#include <vector>

#include "ghzbell/correlations.hpp"
#include "ghzbell/inequalities.hpp"
#include "ghzbell/measurement.hpp"
#include "ghzbell/polytope.hpp"
#include "ghzbell/sampling.hpp"

namespace ghzbell {

// Monte Carlo estimators for violation probabilities, the analytic formulas
// they are compared against, and a finite-statistics experiment simulator.
//
// Every estimator derives all randomness from (spec.seed, sample_index)
// through the sampling module, evaluates samples independently, and
// aggregates counts only, so results are identical for any worker count.

struct EstimateOptions {
  // Worker threads; <= 0 picks the hardware concurrency.  The estimate is
  // independent of this value.
  int workers = 1;
  // Membership-test settings for InequalityClass::kCompleteSet.
  PolytopeOptions polytope{};
  // For kCompleteSet, first run the full-correlation (WWZB) test and count
  // violating samples as nonlocal without invoking the membership solver;
  // a full-correlation violation already certifies nonlocality.
  bool full_correlation_prefilter = true;
};

struct EstimateRecord {
  int n_parties = 0;
  SamplerSpec sampler;
  NoiseSpec noise;
  InequalityClass inequality = InequalityClass::kS1;
  long n_samples = 0;
  long n_violations = 0;
  // Samples whose membership test returned no verdict; excluded from the
  // estimate's denominator (never nonzero for the closed-form classes).
  long n_indeterminate = 0;
  // n_violations / (n_samples - n_indeterminate).
  double p_hat = 0.0;
  // sqrt(p_hat (1 - p_hat) / (n_samples - n_indeterminate)).
  double std_err = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

// Probability that one random measurement configuration drawn from
// `sampler` violates `inequality` on the noisy GHZ state.
EstimateRecord estimate_p(const SamplerSpec& sampler, const NoiseSpec& noise,
                          InequalityClass inequality, long n_samples,
                          const EstimateOptions& options = {});

// Violation-probability curves over a grid of noise strengths for both
// noise kinds at once, evaluated on a single shared sample stream: every
// grid point sees the same sampled configurations, so the curves are
// coupled through common random numbers.  Records are ordered
// depolarizing-then-dephasing with nu ascending within each kind; a nu = 0
// grid point is evaluated once and reported under both kinds.  Each record
// carries the whole sweep's wall time.
//
// For the complete-set class the verdicts at different strengths of one
// kind are linked per sample.  Writing T(nu) for the sample's table,
//   depolarizing:  T(nu2) = F_eta(T(nu1)),   eta = (1-nu2)/(1-nu1) <= 1,
// where F_eta flips every party's outcome independently with probability
// (1-eta)/2 (scaling each row by eta^|subset|), and
//   dephasing:     T(nu2) = alpha T(nu1) + (1-alpha) P,
//                  alpha = ((1-nu2)/(1-nu1))^N,
// where P is the product table of the fully dephased state.  Both maps
// preserve locality, so within one kind a local verdict settles every
// noisier grid point and a nonlocal verdict every less-noisy one.  Each
// kind's chain is therefore walked from the noisiest point downward, and
// separating functionals from earlier verdicts are replayed through
// witness_margin (sound for any vector, either kind) before a solver runs.
// No ordering across kinds is assumed.  Per grid point the counts match a
// direct estimate_p run except for samples only the solver would have left
// indeterminate, some of which the chain logic settles.
std::vector<EstimateRecord> noise_sweep(const SamplerSpec& sampler,
                                        InequalityClass inequality,
                                        const std::vector<double>& nu_grid,
                                        long n_samples,
                                        const EstimateOptions& options = {});

// ---------------------------------------------------------------------------
// Shared-plane (PROM-xy) closed forms and their property checks.

struct Theorem1Report {
  int n_parties = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  // Samples where the floor bound or a closed form failed its tolerance.
  long n_failures = 0;
  // min over samples of  max(S1, S2) - 2^(3N/2 - 1)  (the floor margin).
  double worst_floor_margin = 0.0;
  // max over samples of |S_i - closed_form_i| / 2^((3N-1)/2), i in {1, 2}.
  double worst_closed_form_error = 0.0;
  // min over samples of  max(S1, S2) / 2^((3N-1)/2); at least 1/sqrt(2) up
  // to round-off.
  double min_ratio = 0.0;
};

// Draws PROM-xy configurations and checks, per sample, that
//   max(S1, S2) >= 2^(3N/2 - 1) - 1e-9
// and that S1 and S2 match their closed forms
//   S1 = 2^((3N-1)/2) |sin(chi + (N-1) pi/4)|,
//   S2 = 2^((3N-1)/2) |sin(chi + (N+1) pi/4)|
// within 1e-9 relative to the 2^((3N-1)/2) scale.
Theorem1Report theorem1_check(int n_parties, long n_samples, std::uint64_t seed);

// Probability that a PROM-xy configuration attains
// max(S1, S2) >= (1 - epsilon) 2^((3N-1)/2):  (4/pi) arccos(1 - epsilon),
// clamped to [0, 1]; independent of N.  Requires epsilon in [0, 1].
double threshold_probability(double epsilon);

struct ThresholdCurvePoint {
  double epsilon = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  double predicted = 0.0;  // threshold_probability(epsilon)
};

// Empirical counterpart of threshold_probability on a shared sample set:
// one pass of n_samples PROM-xy draws evaluated at every epsilon.  A sample
// counts once  max(S1, S2) / 2^((3N-1)/2) >= (1 - epsilon) - 1e-12  (the
// subtraction guards exact-tie round-off at epsilon = 1 - 1/sqrt(2)).
std::vector<ThresholdCurvePoint> threshold_curve(int n_parties,
                                                 const std::vector<double>& epsilons,
                                                 long n_samples,
                                                 std::uint64_t seed,
                                                 int workers = 1);

// ---------------------------------------------------------------------------
// Depolarizing-noise thresholds for the shared-plane pair {S1, S2}.

struct NoiseThresholds {
  // Below nu_always every PROM-xy configuration violates S1 or S2:
  // 1 - 2^(1/N) / sqrt(2).
  double nu_always = 0.0;
  // At or above nu_never no configuration violates any MABK member:
  // 1 - 2^(1/(2N)) / sqrt(2).
  double nu_never = 0.0;
};

NoiseThresholds noise_thresholds(int n_parties);

// Probability that a PROM-xy configuration violates S1 or S2 at
// depolarizing strength nu:
//   (4/pi) arccos( 2^((1-N)/2) / (1-nu)^N )   for nu in [nu_always, nu_never],
// 1 below the bracket, 0 above it.
double noisy_prom_probability(int n_parties, double nu);

// ---------------------------------------------------------------------------
// Violation probability as a function of the shared reference direction.

struct AreaGrid {
  int alpha_nodes = 64;
  int lambda_nodes = 64;
  // When non-empty, these polar angles replace the regular lambda grid and
  // nodes are weighted uniformly instead of by sin(lambda) (useful for
  // degenerate slices such as {0}).
  std::vector<double> lambda_values;
};

struct AreaRecord {
  int n_parties = 0;
  InequalityClass inequality = InequalityClass::kS1S2;
  int alpha_nodes = 0;
  int lambda_nodes = 0;
  long samples_per_node = 0;
  std::uint64_t seed = 0;
  // Flattened nodes, lambda-major: node = i_lambda * alpha_nodes + i_alpha.
  std::vector<double> node_alpha;
  std::vector<double> node_lambda;
  std::vector<double> node_weight;  // normalized quadrature weights
  std::vector<double> node_p_hat;
  std::vector<long> node_indeterminate;
  // Weighted fraction of nodes with at least one violating sample (A0) and
  // with zero non-violating decided samples (A1).
  double a0_hat = 0.0;
  double a1_hat = 0.0;
  long n_indeterminate = 0;
  double wall_seconds = 0.0;
};

// Estimates the violation probability of `inequality` on a grid of shared
// reference directions n(alpha, lambda) over the upper hemisphere, with
// PROM sampling in the plane orthogonal to each node's direction.  A1 is
// operational: a node counts only if none of its decided samples failed to
// violate, a one-sided test at the per-node sample size.
AreaRecord area_fractions(int n_parties, InequalityClass inequality,
                          const AreaGrid& grid, long samples_per_node,
                          std::uint64_t seed, const EstimateOptions& options = {});

// ---------------------------------------------------------------------------
// Perturbed shared directions.

struct PerturbedPoint {
  double lambda_std = 0.0;
  EstimateRecord s1s2;
  EstimateRecord mabk;
  double delta = 0.0;  // mabk.p_hat - s1s2.p_hat
};

// Violation probabilities when each party's reference direction is drawn
// with polar spread lambda_std, for the pair {S1, S2} and for the full MABK
// family, evaluated on the same sampled configurations per point (the same
// base seed is reused across points, coupling the sweep through common
// random numbers).
std::vector<PerturbedPoint> perturbed_sweep(int n_parties,
                                            const std::vector<double>& lambda_stds,
                                            long n_samples, std::uint64_t seed,
                                            const EstimateOptions& options = {});

// ---------------------------------------------------------------------------
// Finite-statistics simulation.

// Simulates `n_copies` runs of the measurement protocol: per copy, a
// uniformly random joint setting choice and a Born-rule outcome drawn from
// the exact noisy-GHZ distribution; returns the relative-frequency
// correlation table (full and restricted entries).  Cells that were never
// sampled report 0.  Per copy the stream (seed, copy_index) supplies the
// setting bits (one word) and then the outcome variate.
CorrelationTable simulate_experiment(const MeasurementConfig& config,
                                     const NoiseSpec& noise, long n_copies,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------

// R = log2(p_mabk / p_s1); requires both probabilities positive.
double r_statistic(double p_mabk, double p_s1);

}  // namespace ghzbell

#endif  // GHZBELL_EXPERIMENTS_HPP
