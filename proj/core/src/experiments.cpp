#include "ghzbell/experiments.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "ghzbell/errors.hpp"
#include "ghzbell/rng.hpp"

namespace ghzbell {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(worker_index, begin, end) over a static partition of [0, n).
// Worker exceptions are rethrown in the calling thread.
template <typename Fn>
void run_partitioned(long n, int requested_workers, Fn&& fn) {
  const int workers = static_cast<int>(
      std::min<long>(resolve_workers(requested_workers), std::max(n, 1L)));
  if (workers <= 1) {
    fn(0, 0L, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    const long lo = n * w / workers;
    const long hi = n * (w + 1) / workers;
    pool.emplace_back([&fn, &error, &error_mutex, w, lo, hi] {
      try {
        fn(w, lo, hi);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Tally {
  long violated = 0;
  long not_violated = 0;
  long indeterminate = 0;

  Tally& operator+=(const Tally& o) {
    violated += o.violated;
    not_violated += o.not_violated;
    indeterminate += o.indeterminate;
    return *this;
  }
};

// Classifies one sampled configuration under `inequality`.  `checker` must
// be non-null for the complete-set class.
void classify_sample(const CorrelationTable& table, InequalityClass inequality,
                     bool prefilter, LocalPolytopeChecker* checker, Tally& tally) {
  if (inequality != InequalityClass::kCompleteSet) {
    if (check_violation(table, inequality).violated) {
      ++tally.violated;
    } else {
      ++tally.not_violated;
    }
    return;
  }
  if (prefilter && evaluate_wwzb(table).violated) {
    ++tally.violated;  // a full-correlation violation certifies nonlocality
    return;
  }
  switch (checker->check(table).outcome) {
    case PolytopeOutcome::kNonlocal:
      ++tally.violated;
      break;
    case PolytopeOutcome::kLocal:
      ++tally.not_violated;
      break;
    case PolytopeOutcome::kIndeterminate:
      ++tally.indeterminate;
      break;
  }
}

EstimateRecord make_record(const SamplerSpec& sampler, const NoiseSpec& noise,
                           InequalityClass inequality, long n_samples,
                           const Tally& tally, double wall_seconds) {
  EstimateRecord rec;
  rec.n_parties = sampler.n_parties;
  rec.sampler = sampler;
  rec.noise = noise;
  rec.inequality = inequality;
  rec.n_samples = n_samples;
  rec.n_violations = tally.violated;
  rec.n_indeterminate = tally.indeterminate;
  const long denom = n_samples - tally.indeterminate;
  if (denom > 0) {
    rec.p_hat = static_cast<double>(tally.violated) / static_cast<double>(denom);
    rec.std_err = std::sqrt(rec.p_hat * (1.0 - rec.p_hat) / static_cast<double>(denom));
  }
  rec.seed = sampler.seed;
  rec.wall_seconds = wall_seconds;
  return rec;
}

// Derives an independent sampler seed for a grid node or sub-run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
  return splitmix64_next(state);
}

void require_samples(long n_samples, const char* what) {
  if (n_samples < 1) {
    throw usage_error(std::string(what) + ": need at least one sample");
  }
}

}  // namespace

EstimateRecord estimate_p(const SamplerSpec& sampler, const NoiseSpec& noise,
                          InequalityClass inequality, long n_samples,
                          const EstimateOptions& options) {
  sampler.validate();
  noise.validate();
  require_samples(n_samples, "estimate_p");
  const auto t0 = Clock::now();
  const bool membership = inequality == InequalityClass::kCompleteSet;
  const auto scope = membership ? CorrelationTable::Scope::kWithRestricted
                                : CorrelationTable::Scope::kFullOnly;

  const int max_workers = resolve_workers(options.workers);
  std::vector<Tally> tallies(max_workers);
  run_partitioned(n_samples, options.workers, [&](int w, long lo, long hi) {
    Tally& tally = tallies[w];
    std::optional<LocalPolytopeChecker> checker;
    if (membership) checker.emplace(sampler.n_parties, options.polytope);
    for (long i = lo; i < hi; ++i) {
      const MeasurementConfig config = sample_config(sampler, static_cast<std::uint64_t>(i));
      const CorrelationTable table = build_correlation_table(config, noise, scope);
      classify_sample(table, inequality, options.full_correlation_prefilter,
                      checker ? &*checker : nullptr, tally);
    }
  });
  Tally total;
  for (const Tally& t : tallies) total += t;
  return make_record(sampler, noise, inequality, n_samples, total,
                     seconds_since(t0));
}

std::vector<EstimateRecord> noise_sweep(const SamplerSpec& sampler,
                                        InequalityClass inequality,
                                        const std::vector<double>& nu_grid,
                                        long n_samples,
                                        const EstimateOptions& options) {
  sampler.validate();
  require_samples(n_samples, "noise_sweep");
  if (nu_grid.empty()) throw usage_error("noise_sweep: empty nu grid");
  std::vector<double> nus = nu_grid;
  std::sort(nus.begin(), nus.end());
  nus.erase(std::unique(nus.begin(), nus.end()), nus.end());
  for (double nu : nus) NoiseSpec::depolarizing(nu).validate();

  const auto t0 = Clock::now();
  const bool membership = inequality == InequalityClass::kCompleteSet;
  const auto scope = membership ? CorrelationTable::Scope::kWithRestricted
                                : CorrelationTable::Scope::kFullOnly;
  const bool has_zero = nus.front() == 0.0;
  const std::size_t first_pos = has_zero ? 1 : 0;
  const std::size_t n_pos = nus.size() - first_pos;
  const std::size_t n_nu = nus.size();
  constexpr std::array<NoiseKind, 2> kKinds = {NoiseKind::kDepolarizing,
                                               NoiseKind::kDephasing};

  enum class Mark : std::uint8_t { kUnknown, kLocal, kNonlocal, kIndet };

  const int max_workers = resolve_workers(options.workers);
  // One tally slot per output record: kind-major, nu ascending.
  std::vector<std::vector<Tally>> tallies(max_workers,
                                          std::vector<Tally>(2 * n_nu));

  run_partitioned(n_samples, options.workers, [&](int w, long lo, long hi) {
    std::vector<Tally>& mine = tallies[w];
    std::optional<LocalPolytopeChecker> checker;
    if (membership) checker.emplace(sampler.n_parties, options.polytope);
    // Separating functionals certified on this sample's tables so far.
    std::vector<std::vector<double>> witnesses;
    std::array<std::vector<Mark>, 2> marks;
    for (auto& m : marks) m.resize(n_pos);

    const auto tally_mark = [](Tally& t, Mark m) {
      switch (m) {
        case Mark::kLocal:
          ++t.not_violated;
          break;
        case Mark::kNonlocal:
          ++t.violated;
          break;
        default:
          ++t.indeterminate;
          break;
      }
    };

    // Membership mark of this sample's table at `noise`; stored witnesses
    // are replayed first, so a solver only runs when none separates.
    const auto classify_member = [&](const MeasurementConfig& config,
                                     const NoiseSpec& noise) -> Mark {
      const CorrelationTable table = build_correlation_table(config, noise, scope);
      std::vector<double> b = table.correlation_vector();
      for (const auto& wit : witnesses) {
        if (checker->witness_margin(wit, b) > 0.0) return Mark::kNonlocal;
      }
      PolytopeVerdict verdict = checker->check_vector(b);
      if (verdict.outcome == PolytopeOutcome::kNonlocal) {
        if (!verdict.separating.empty() && witnesses.size() < 8) {
          witnesses.push_back(std::move(verdict.separating));
        }
        return Mark::kNonlocal;
      }
      if (verdict.outcome == PolytopeOutcome::kLocal) return Mark::kLocal;
      return Mark::kIndet;
    };

    for (long i = lo; i < hi; ++i) {
      const MeasurementConfig config =
          sample_config(sampler, static_cast<std::uint64_t>(i));

      if (!membership) {
        // Closed-form classes are cheap; evaluate every grid point directly.
        if (has_zero) {
          const CorrelationTable table =
              build_correlation_table(config, NoiseSpec::none(), scope);
          const Mark m = check_violation(table, inequality).violated
                             ? Mark::kNonlocal
                             : Mark::kLocal;
          tally_mark(mine[0], m);
          tally_mark(mine[n_nu], m);
        }
        for (std::size_t k = 0; k < 2; ++k) {
          for (std::size_t j = first_pos; j < n_nu; ++j) {
            const CorrelationTable table = build_correlation_table(
                config, NoiseSpec{kKinds[k], nus[j]}, scope);
            tally_mark(mine[k * n_nu + j],
                       check_violation(table, inequality).violated
                           ? Mark::kNonlocal
                           : Mark::kLocal);
          }
        }
        continue;
      }

      witnesses.clear();
      Mark zero_mark = Mark::kUnknown;
      if (has_zero) {
        zero_mark = classify_member(config, NoiseSpec::none());
        if (zero_mark == Mark::kLocal) {
          // Noiseless locality settles every grid point of both kinds.
          for (std::size_t slot = 0; slot < 2 * n_nu; ++slot) {
            tally_mark(mine[slot], Mark::kLocal);
          }
          continue;
        }
      }
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<Mark>& mk = marks[k];
        std::fill(mk.begin(), mk.end(), Mark::kUnknown);
        for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(n_pos) - 1; j >= 0;
             --j) {
          const Mark o =
              classify_member(config, NoiseSpec{kKinds[k], nus[first_pos + j]});
          mk[j] = o;
          if (o == Mark::kNonlocal) {
            // Everything less noisy in this kind is nonlocal too, the
            // shared noiseless point included.
            for (std::ptrdiff_t jj = 0; jj < j; ++jj) mk[jj] = Mark::kNonlocal;
            if (zero_mark == Mark::kIndet) zero_mark = Mark::kNonlocal;
            break;
          }
          if (o == Mark::kLocal) {
            // Everything noisier in this kind is local; upgrade the points
            // the solver left undecided on the way down.
            for (std::size_t jj = static_cast<std::size_t>(j) + 1; jj < n_pos;
                 ++jj) {
              if (mk[jj] == Mark::kIndet) mk[jj] = Mark::kLocal;
            }
          }
        }
      }
      if (has_zero) {
        tally_mark(mine[0], zero_mark);
        tally_mark(mine[n_nu], zero_mark);
      }
      for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t j = 0; j < n_pos; ++j) {
          tally_mark(mine[k * n_nu + first_pos + j], marks[k][j]);
        }
      }
    }
  });

  const double wall = seconds_since(t0);
  std::vector<EstimateRecord> records;
  records.reserve(2 * n_nu);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < n_nu; ++j) {
      Tally total;
      for (int w = 0; w < max_workers; ++w) total += tallies[w][k * n_nu + j];
      records.push_back(make_record(sampler, NoiseSpec{kKinds[k], nus[j]},
                                    inequality, n_samples, total, wall));
    }
  }
  return records;
}

// ---------------------------------------------------------------------------

Theorem1Report theorem1_check(int n_parties, long n_samples, std::uint64_t seed) {
  if (n_parties < 2) throw usage_error("theorem1_check: need at least two parties");
  require_samples(n_samples, "theorem1_check");
  const SamplerSpec spec = SamplerSpec::prom_xy(n_parties, seed);
  const double scale = std::pow(2.0, 0.5 * (3 * n_parties - 1));
  const double floor_bound = std::pow(2.0, 1.5 * n_parties - 1.0);
  const double quarter = std::numbers::pi / 4.0;

  Theorem1Report report;
  report.n_parties = n_parties;
  report.n_samples = n_samples;
  report.seed = seed;
  report.worst_floor_margin = std::numeric_limits<double>::infinity();
  report.min_ratio = std::numeric_limits<double>::infinity();

  for (long i = 0; i < n_samples; ++i) {
    const PromXYSample sample = sample_prom_xy(spec, static_cast<std::uint64_t>(i));
    const CorrelationTable table = build_correlation_table(
        sample.config, NoiseSpec{}, CorrelationTable::Scope::kFullOnly);
    const double s1 = evaluate_s1(table);
    const double s2 = evaluate_s2(table);
    const double closed1 =
        scale * std::fabs(std::sin(sample.chi + (n_parties - 1) * quarter));
    const double closed2 =
        scale * std::fabs(std::sin(sample.chi + (n_parties + 1) * quarter));
    const double err = std::max(std::fabs(s1 - closed1), std::fabs(s2 - closed2)) / scale;
    const double best = std::max(s1, s2);
    const double margin = best - floor_bound;
    if (margin < -1e-9 || err > 1e-9) ++report.n_failures;
    report.worst_floor_margin = std::min(report.worst_floor_margin, margin);
    report.worst_closed_form_error = std::max(report.worst_closed_form_error, err);
    report.min_ratio = std::min(report.min_ratio, best / scale);
  }
  return report;
}

double threshold_probability(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw usage_error("threshold_probability: epsilon must lie in [0, 1]");
  }
  const double p = (4.0 / std::numbers::pi) * std::acos(1.0 - epsilon);
  return std::clamp(p, 0.0, 1.0);
}

std::vector<ThresholdCurvePoint> threshold_curve(int n_parties,
                                                 const std::vector<double>& epsilons,
                                                 long n_samples,
                                                 std::uint64_t seed,
                                                 int workers) {
  if (n_parties < 2) throw usage_error("threshold_curve: need at least two parties");
  require_samples(n_samples, "threshold_curve");
  if (epsilons.empty()) throw usage_error("threshold_curve: empty epsilon grid");
  for (double e : epsilons) (void)threshold_probability(e);  // range check

  const SamplerSpec spec = SamplerSpec::prom_xy(n_parties, seed);
  const double inv_scale = std::pow(2.0, -0.5 * (3 * n_parties - 1));
  const int max_workers = resolve_workers(workers);
  std::vector<std::vector<long>> counts(max_workers,
                                        std::vector<long>(epsilons.size(), 0));
  run_partitioned(n_samples, workers, [&](int w, long lo, long hi) {
    std::vector<long>& mine = counts[w];
    for (long i = lo; i < hi; ++i) {
      const PromXYSample sample = sample_prom_xy(spec, static_cast<std::uint64_t>(i));
      const CorrelationTable table = build_correlation_table(
          sample.config, NoiseSpec{}, CorrelationTable::Scope::kFullOnly);
      const double ratio =
          std::max(evaluate_s1(table), evaluate_s2(table)) * inv_scale;
      for (std::size_t j = 0; j < epsilons.size(); ++j) {
        if (ratio >= (1.0 - epsilons[j]) - 1e-12) ++mine[j];
      }
    }
  });

  std::vector<ThresholdCurvePoint> points(epsilons.size());
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    long c = 0;
    for (int w = 0; w < max_workers; ++w) c += counts[w][j];
    ThresholdCurvePoint& pt = points[j];
    pt.epsilon = epsilons[j];
    pt.p_hat = static_cast<double>(c) / static_cast<double>(n_samples);
    pt.std_err = std::sqrt(pt.p_hat * (1.0 - pt.p_hat) / static_cast<double>(n_samples));
    pt.predicted = threshold_probability(epsilons[j]);
  }
  return points;
}

// ---------------------------------------------------------------------------

NoiseThresholds noise_thresholds(int n_parties) {
  if (n_parties < 2) throw usage_error("noise_thresholds: need at least two parties");
  NoiseThresholds t;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  t.nu_always = 1.0 - std::pow(2.0, 1.0 / n_parties) * inv_sqrt2;
  t.nu_never = 1.0 - std::pow(2.0, 0.5 / n_parties) * inv_sqrt2;
  return t;
}

double noisy_prom_probability(int n_parties, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw usage_error("noisy_prom_probability: nu must lie in [0, 1]");
  }
  const NoiseThresholds t = noise_thresholds(n_parties);
  if (nu <= t.nu_always) return 1.0;
  if (nu >= t.nu_never) return 0.0;
  const double arg = std::pow(2.0, 0.5 * (1 - n_parties)) / std::pow(1.0 - nu, n_parties);
  return (4.0 / std::numbers::pi) * std::acos(std::clamp(arg, -1.0, 1.0));
}

// ---------------------------------------------------------------------------

AreaRecord area_fractions(int n_parties, InequalityClass inequality,
                          const AreaGrid& grid, long samples_per_node,
                          std::uint64_t seed, const EstimateOptions& options) {
  if (n_parties < 2) throw usage_error("area_fractions: need at least two parties");
  require_samples(samples_per_node, "area_fractions");
  if (grid.alpha_nodes < 1) throw usage_error("area_fractions: alpha_nodes < 1");
  if (grid.lambda_values.empty() && grid.lambda_nodes < 1) {
    throw usage_error("area_fractions: lambda_nodes < 1");
  }
  const auto t0 = Clock::now();

  std::vector<double> lambdas;
  const bool explicit_lambdas = !grid.lambda_values.empty();
  if (explicit_lambdas) {
    lambdas = grid.lambda_values;
  } else {
    lambdas.reserve(grid.lambda_nodes);
    for (int j = 0; j < grid.lambda_nodes; ++j) {
      lambdas.push_back((j + 0.5) * (std::numbers::pi / 2.0) / grid.lambda_nodes);
    }
  }
  const int n_lambda = static_cast<int>(lambdas.size());
  const int n_alpha = grid.alpha_nodes;
  const long n_nodes = static_cast<long>(n_lambda) * n_alpha;

  AreaRecord rec;
  rec.n_parties = n_parties;
  rec.inequality = inequality;
  rec.alpha_nodes = n_alpha;
  rec.lambda_nodes = n_lambda;
  rec.samples_per_node = samples_per_node;
  rec.seed = seed;
  rec.node_alpha.resize(n_nodes);
  rec.node_lambda.resize(n_nodes);
  rec.node_weight.resize(n_nodes);
  rec.node_p_hat.assign(n_nodes, 0.0);
  rec.node_indeterminate.assign(n_nodes, 0);

  double weight_sum = 0.0;
  for (long node = 0; node < n_nodes; ++node) {
    const int j = static_cast<int>(node / n_alpha);
    const int i = static_cast<int>(node % n_alpha);
    rec.node_alpha[node] = (i + 0.5) * (2.0 * std::numbers::pi) / n_alpha;
    rec.node_lambda[node] = lambdas[j];
    rec.node_weight[node] = explicit_lambdas ? 1.0 : std::sin(lambdas[j]);
    weight_sum += rec.node_weight[node];
  }
  for (long node = 0; node < n_nodes; ++node) rec.node_weight[node] /= weight_sum;

  const bool membership = inequality == InequalityClass::kCompleteSet;
  const auto scope = membership ? CorrelationTable::Scope::kWithRestricted
                                : CorrelationTable::Scope::kFullOnly;
  std::vector<Tally> node_tallies(n_nodes);
  run_partitioned(n_nodes, options.workers, [&](int, long lo, long hi) {
    std::optional<LocalPolytopeChecker> checker;
    if (membership) checker.emplace(n_parties, options.polytope);
    for (long node = lo; node < hi; ++node) {
      const SamplerSpec spec = SamplerSpec::prom_rotated(
          n_parties, derive_seed(seed, static_cast<std::uint64_t>(node)),
          rec.node_alpha[node], rec.node_lambda[node]);
      Tally& tally = node_tallies[node];
      for (long i = 0; i < samples_per_node; ++i) {
        const MeasurementConfig config = sample_config(spec, static_cast<std::uint64_t>(i));
        const CorrelationTable table = build_correlation_table(config, NoiseSpec{}, scope);
        classify_sample(table, inequality, options.full_correlation_prefilter,
                        checker ? &*checker : nullptr, tally);
      }
    }
  });

  for (long node = 0; node < n_nodes; ++node) {
    const Tally& t = node_tallies[node];
    const long decided = t.violated + t.not_violated;
    rec.node_p_hat[node] =
        decided > 0 ? static_cast<double>(t.violated) / static_cast<double>(decided) : 0.0;
    rec.node_indeterminate[node] = t.indeterminate;
    rec.n_indeterminate += t.indeterminate;
    if (t.violated > 0) rec.a0_hat += rec.node_weight[node];
    if (decided > 0 && t.not_violated == 0) rec.a1_hat += rec.node_weight[node];
  }
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

// ---------------------------------------------------------------------------

std::vector<PerturbedPoint> perturbed_sweep(int n_parties,
                                            const std::vector<double>& lambda_stds,
                                            long n_samples, std::uint64_t seed,
                                            const EstimateOptions& options) {
  if (n_parties < 2) throw usage_error("perturbed_sweep: need at least two parties");
  require_samples(n_samples, "perturbed_sweep");
  if (lambda_stds.empty()) throw usage_error("perturbed_sweep: empty lambda_std list");

  std::vector<PerturbedPoint> points;
  points.reserve(lambda_stds.size());
  const int max_workers = resolve_workers(options.workers);
  for (const double lambda_std : lambda_stds) {
    const auto t0 = Clock::now();
    // The same base seed couples the sweep through common random numbers:
    // per party and sample, only the perturbation quantile changes with
    // lambda_std, so neighboring points share their chi draws.
    const SamplerSpec spec = SamplerSpec::prom_perturbed(n_parties, seed, lambda_std);
    spec.validate();
    std::vector<Tally> s1s2_tallies(max_workers);
    std::vector<Tally> mabk_tallies(max_workers);
    run_partitioned(n_samples, options.workers, [&](int w, long lo, long hi) {
      for (long i = lo; i < hi; ++i) {
        const MeasurementConfig config = sample_config(spec, static_cast<std::uint64_t>(i));
        const CorrelationTable table = build_correlation_table(
            config, NoiseSpec{}, CorrelationTable::Scope::kFullOnly);
        classify_sample(table, InequalityClass::kS1S2, false, nullptr, s1s2_tallies[w]);
        classify_sample(table, InequalityClass::kMabk, false, nullptr, mabk_tallies[w]);
      }
    });
    Tally s1s2_total;
    Tally mabk_total;
    for (int w = 0; w < max_workers; ++w) {
      s1s2_total += s1s2_tallies[w];
      mabk_total += mabk_tallies[w];
    }
    const double wall = seconds_since(t0);
    PerturbedPoint pt;
    pt.lambda_std = lambda_std;
    pt.s1s2 = make_record(spec, NoiseSpec{}, InequalityClass::kS1S2, n_samples,
                          s1s2_total, wall);
    pt.mabk = make_record(spec, NoiseSpec{}, InequalityClass::kMabk, n_samples,
                          mabk_total, wall);
    pt.delta = pt.mabk.p_hat - pt.s1s2.p_hat;
    points.push_back(std::move(pt));
  }
  return points;
}

// ---------------------------------------------------------------------------

CorrelationTable simulate_experiment(const MeasurementConfig& config,
                                     const NoiseSpec& noise, long n_copies,
                                     std::uint64_t seed) {
  config.validate();
  noise.validate();
  if (n_copies < 1) throw usage_error("simulate_experiment: need at least one copy");
  const int n = config.n_parties;
  const CorrelationTable exact = build_correlation_table(
      config, noise, CorrelationTable::Scope::kWithRestricted);
  const ProbabilityTable probs = correlation_table_to_probabilities(exact);

  const std::uint32_t n_settings = 1u << n;
  // Per-setting cumulative outcome distribution.
  std::vector<double> cdf(static_cast<std::size_t>(n_settings) * n_settings);
  for (std::uint32_t s = 0; s < n_settings; ++s) {
    double acc = 0.0;
    for (std::uint32_t o = 0; o < n_settings; ++o) {
      acc += probs.p(s, o);
      cdf[(static_cast<std::size_t>(s) << n) + o] = acc;
    }
    cdf[(static_cast<std::size_t>(s) << n) + n_settings - 1] = 1.0;
  }

  // Subset-index lookup per (settings, subset mask).
  std::size_t n_cells = 1;
  for (int k = 0; k < n; ++k) n_cells *= 3;
  std::vector<std::uint32_t> subset_index(static_cast<std::size_t>(n_settings) * n_settings);
  for (std::uint32_t s = 0; s < n_settings; ++s) {
    for (std::uint32_t mask = 0; mask < n_settings; ++mask) {
      std::uint32_t idx = 0;
      std::uint32_t base = 1;
      for (int k = 0; k < n; ++k) {
        if (mask & (1u << k)) idx += base * (1u + ((s >> k) & 1u));
        base *= 3;
      }
      subset_index[(static_cast<std::size_t>(s) << n) + mask] = idx;
    }
  }

  std::vector<long long> sums(n_cells, 0);
  std::vector<long long> counts(n_cells, 0);
  for (long copy = 0; copy < n_copies; ++copy) {
    RandomStream rs(seed, static_cast<std::uint64_t>(copy));
    const std::uint32_t s = static_cast<std::uint32_t>(rs.next_u64()) & (n_settings - 1);
    const double u = rs.next_unit();
    const double* block = &cdf[static_cast<std::size_t>(s) << n];
    const std::uint32_t o = static_cast<std::uint32_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(block, block + n_settings, u) - block,
                                 n_settings - 1));
    const std::uint32_t* row = &subset_index[static_cast<std::size_t>(s) << n];
    for (std::uint32_t mask = 0; mask < n_settings; ++mask) {
      const int sign = (std::popcount(mask & o) & 1) ? -1 : 1;
      sums[row[mask]] += sign;
      counts[row[mask]] += 1;
    }
  }

  std::vector<double> restricted(n_cells, 0.0);
  for (std::size_t c = 0; c < n_cells; ++c) {
    if (counts[c] > 0) {
      restricted[c] = static_cast<double>(sums[c]) / static_cast<double>(counts[c]);
    }
  }
  std::vector<double> full(n_settings);
  for (std::uint32_t s = 0; s < n_settings; ++s) {
    full[s] = restricted[subset_index[(static_cast<std::size_t>(s) << n) + n_settings - 1]];
  }
  return CorrelationTable(n, std::move(full), std::move(restricted));
}

// ---------------------------------------------------------------------------

double r_statistic(double p_mabk, double p_s1) {
  if (!(p_mabk > 0.0) || !(p_s1 > 0.0)) {
    throw usage_error("r_statistic: both probabilities must be positive");
  }
  return std::log2(p_mabk / p_s1);
}

}  // namespace ghzbell
