#include "ghzbell/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "ghzbell/errors.hpp"
#include "ghzbell/rng.hpp"

namespace ghzbell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Draw order contract (one stream per sample, parties in index order):
//   RIM        per party, per setting: azimuth, then z.
//   ROM        per party: azimuth, z (first direction), then circle angle.
//   PROM xy / rotated  per party: chi.
//   PROM perturbed     per party: alpha, quantile u for lambda, then chi.
// Changing these orders would silently change every seeded result, so they
// are fixed and tested.

MeasurementDirection uniform_direction(RandomStream& rs) {
  const double phi = rs.next_angle();
  const double z = rs.next_symmetric();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

MeasurementDirection normalized(MeasurementDirection d) {
  const double n = d.norm();
  return {d.x / n, d.y / n, d.z / n};
}

// Direction at azimuth-like angle phi in the plane orthogonal to the
// reference direction (alpha, lambda):
//   x = sin(phi) cos(lambda) cos(alpha) + cos(phi) sin(alpha)
//   y = sin(phi) cos(lambda) sin(alpha) - cos(phi) cos(alpha)
//   z = -sin(phi) sin(lambda)
// For lambda = 0 this sweeps the xy plane; for any (alpha, lambda) it is a
// unit vector orthogonal to the reference direction, and phi and phi + pi/2
// give an orthogonal pair.
MeasurementDirection rotated_plane_direction(double alpha, double lambda,
                                             double phi) {
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  const double sl = std::sin(lambda);
  const double cl = std::cos(lambda);
  const double sa = std::sin(alpha);
  const double ca = std::cos(alpha);
  return {sp * cl * ca + cp * sa, sp * cl * sa - cp * ca, -sp * sl};
}

void require_scheme(const SamplerSpec& spec, SamplerScheme scheme,
                    const char* what) {
  if (spec.scheme != scheme) {
    throw usage_error(std::string(what) + ": spec has scheme " +
                      to_string(spec.scheme));
  }
}

// Perturbation distributions are deterministic in lambda_std, so share the
// tabulated CDFs across samples and threads.
const PolarPerturbation& cached_perturbation(double lambda_std) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<PolarPerturbation>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(lambda_std);
  if (it == cache.end()) {
    it = cache.emplace(lambda_std, std::make_unique<PolarPerturbation>(lambda_std))
             .first;
  }
  return *it->second;
}

// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

const char* to_string(SamplerScheme s) {
  switch (s) {
    case SamplerScheme::kRim: return "rim";
    case SamplerScheme::kRom: return "rom";
    case SamplerScheme::kProm: return "prom";
  }
  return "unknown";
}

MeasurementDirection SphericalDirection::to_direction() const {
  const double sl = std::sin(lambda);
  return {std::cos(alpha) * sl, std::sin(alpha) * sl, std::cos(lambda)};
}

SamplerSpec SamplerSpec::rim(int n, std::uint64_t seed) {
  return {SamplerScheme::kRim, n, seed, std::nullopt, std::nullopt};
}

SamplerSpec SamplerSpec::rom(int n, std::uint64_t seed) {
  return {SamplerScheme::kRom, n, seed, std::nullopt, std::nullopt};
}

SamplerSpec SamplerSpec::prom_xy(int n, std::uint64_t seed) {
  return {SamplerScheme::kProm, n, seed, SphericalDirection{0.0, 0.0}, std::nullopt};
}

SamplerSpec SamplerSpec::prom_rotated(int n, std::uint64_t seed, double alpha,
                                      double lambda) {
  return {SamplerScheme::kProm, n, seed, SphericalDirection{alpha, lambda},
          std::nullopt};
}

SamplerSpec SamplerSpec::prom_perturbed(int n, std::uint64_t seed,
                                        double lambda_std) {
  return {SamplerScheme::kProm, n, seed, std::nullopt, lambda_std};
}

const char* SamplerSpec::variant_name() const {
  switch (scheme) {
    case SamplerScheme::kRim: return "rim";
    case SamplerScheme::kRom: return "rom";
    case SamplerScheme::kProm:
      if (lambda_std.has_value()) return "prom-perturbed";
      if (normal.has_value() && normal->lambda == 0.0 && normal->alpha == 0.0) {
        return "prom-xy";
      }
      return "prom";
  }
  return "unknown";
}

void SamplerSpec::validate() const {
  if (n_parties < 1) {
    throw usage_error("sampler spec needs at least one party");
  }
  const bool has_normal = normal.has_value();
  const bool has_spread = lambda_std.has_value();
  if (scheme == SamplerScheme::kProm) {
    if (has_normal == has_spread) {
      throw usage_error(
          "PROM requires exactly one of a reference direction or a "
          "perturbation spread");
    }
    if (has_spread && !(*lambda_std >= 0.0)) {
      throw usage_error("perturbation spread must be >= 0");
    }
    if (has_normal && !(normal->lambda >= 0.0 && normal->lambda <= std::numbers::pi)) {
      throw usage_error("reference polar angle must lie in [0, pi]");
    }
  } else if (has_normal || has_spread) {
    throw usage_error("RIM/ROM samplers take no reference direction or spread");
  }
}

MeasurementConfig sample_rim(const SamplerSpec& spec, std::uint64_t sample_index) {
  spec.validate();
  require_scheme(spec, SamplerScheme::kRim, "sample_rim");
  RandomStream rs(spec.seed, sample_index);
  MeasurementConfig config(spec.n_parties);
  for (int k = 0; k < spec.n_parties; ++k) {
    config.directions[k][0] = uniform_direction(rs);
    config.directions[k][1] = uniform_direction(rs);
  }
  return config;
}

MeasurementConfig sample_rom(const SamplerSpec& spec, std::uint64_t sample_index) {
  spec.validate();
  require_scheme(spec, SamplerScheme::kRom, "sample_rom");
  RandomStream rs(spec.seed, sample_index);
  MeasurementConfig config(spec.n_parties);
  for (int k = 0; k < spec.n_parties; ++k) {
    const MeasurementDirection first = uniform_direction(rs);
    const double psi = rs.next_angle();
    // Build an orthonormal frame of the plane orthogonal to `first`; take
    // the cross product against whichever axis is farther away to keep the
    // construction well conditioned near the poles.
    const MeasurementDirection axis = (std::fabs(first.z) > 0.9)
                                          ? MeasurementDirection{1.0, 0.0, 0.0}
                                          : MeasurementDirection{0.0, 0.0, 1.0};
    const MeasurementDirection e1 = normalized(first.cross(axis));
    const MeasurementDirection e2 = first.cross(e1);
    MeasurementDirection second{std::cos(psi) * e1.x + std::sin(psi) * e2.x,
                                std::cos(psi) * e1.y + std::sin(psi) * e2.y,
                                std::cos(psi) * e1.z + std::sin(psi) * e2.z};
    config.directions[k][0] = first;
    config.directions[k][1] = normalized(second);
  }
  return config;
}

PromXYSample sample_prom_xy(const SamplerSpec& spec, std::uint64_t sample_index) {
  spec.validate();
  require_scheme(spec, SamplerScheme::kProm, "sample_prom_xy");
  RandomStream rs(spec.seed, sample_index);
  PromXYSample sample;
  sample.config = MeasurementConfig(spec.n_parties);
  double chi_sum = 0.0;
  for (int k = 0; k < spec.n_parties; ++k) {
    const double chi = rs.next_angle();
    chi_sum += chi;
    const double c = std::cos(chi);
    const double s = std::sin(chi);
    sample.config.directions[k][0] = {c, s, 0.0};
    // chi + pi/2 evaluated exactly: (cos, sin) -> (-sin, cos).
    sample.config.directions[k][1] = {-s, c, 0.0};
  }
  sample.chi = std::fmod(chi_sum, kTwoPi);
  return sample;
}

MeasurementConfig sample_prom_rotated(const SamplerSpec& spec,
                                      std::uint64_t sample_index) {
  spec.validate();
  require_scheme(spec, SamplerScheme::kProm, "sample_prom_rotated");
  if (!spec.normal.has_value()) {
    throw usage_error("sample_prom_rotated needs a reference direction");
  }
  const double alpha = spec.normal->alpha;
  const double lambda = spec.normal->lambda;
  RandomStream rs(spec.seed, sample_index);
  MeasurementConfig config(spec.n_parties);
  for (int k = 0; k < spec.n_parties; ++k) {
    const double chi = rs.next_angle();
    config.directions[k][0] = rotated_plane_direction(alpha, lambda, chi);
    config.directions[k][1] = rotated_plane_direction(alpha, lambda, chi + kHalfPi);
  }
  return config;
}

PerturbedSample sample_perturbed_normals(const SamplerSpec& spec,
                                         std::uint64_t sample_index) {
  spec.validate();
  require_scheme(spec, SamplerScheme::kProm, "sample_perturbed_normals");
  if (!spec.lambda_std.has_value()) {
    throw usage_error("sample_perturbed_normals needs a perturbation spread");
  }
  const PolarPerturbation& dist = cached_perturbation(*spec.lambda_std);
  RandomStream rs(spec.seed, sample_index);
  PerturbedSample sample;
  sample.config = MeasurementConfig(spec.n_parties);
  sample.normals.resize(spec.n_parties);
  for (int k = 0; k < spec.n_parties; ++k) {
    const double alpha = rs.next_angle();
    const double lambda = dist.quantile(rs.next_unit());
    const double chi = rs.next_angle();
    sample.normals[k] = SphericalDirection{alpha, lambda}.to_direction();
    sample.config.directions[k][0] = rotated_plane_direction(alpha, lambda, chi);
    sample.config.directions[k][1] =
        rotated_plane_direction(alpha, lambda, chi + kHalfPi);
  }
  return sample;
}

MeasurementConfig sample_config(const SamplerSpec& spec, std::uint64_t sample_index) {
  spec.validate();
  switch (spec.scheme) {
    case SamplerScheme::kRim:
      return sample_rim(spec, sample_index);
    case SamplerScheme::kRom:
      return sample_rom(spec, sample_index);
    case SamplerScheme::kProm:
      if (spec.lambda_std.has_value()) {
        return sample_perturbed_normals(spec, sample_index).config;
      }
      if (spec.normal->lambda == 0.0 && spec.normal->alpha == 0.0) {
        return sample_prom_xy(spec, sample_index).config;
      }
      return sample_prom_rotated(spec, sample_index);
  }
  throw usage_error("unknown sampler scheme");
}

// --- PolarPerturbation -------------------------------------------------------

PolarPerturbation::PolarPerturbation(double lambda_std) : lambda_std_(lambda_std) {
  if (!(lambda_std >= 0.0)) {
    throw usage_error("perturbation spread must be >= 0");
  }
  if (lambda_std == 0.0) {
    grid_max_ = 0.0;
    cdf_ = {0.0, 1.0};
    return;
  }
  // Keep the inverse-CDF grid resolved at scale lambda_std: past about
  // 12 standard deviations the density has decayed below 1e-25 of its peak,
  // so truncating there changes nothing at double precision.
  grid_max_ = std::min(kHalfPi, 12.0 * lambda_std);
  constexpr int kCells = 4096;
  const auto f = [this](double x) { return density(x); };
  cdf_.resize(kCells + 1);
  cdf_[0] = 0.0;
  const double cell = grid_max_ / kCells;
  for (int i = 0; i < kCells; ++i) {
    const double a = cell * i;
    const double b = cell * (i + 1);
    cdf_[i + 1] = cdf_[i] + integrate(f, a, b, 1e-10 / kCells);
  }
  const double total = cdf_.back();
  if (!(total > 0.0)) {
    throw consistency_error("perturbation density integrated to zero");
  }
  for (double& v : cdf_) v /= total;
  cdf_.back() = 1.0;
}

double PolarPerturbation::density(double lambda) const {
  if (lambda_std_ == 0.0) return 0.0;
  if (lambda < 0.0 || lambda > kHalfPi) return 0.0;
  const double inv_var = 1.0 / (lambda_std_ * lambda_std_);
  const double exponent = 4.0 * inv_var;
  // cos(lambda/2)^exponent via exp/log; lambda <= pi/2 keeps the base >= cos(pi/4).
  const double base = std::cos(0.5 * lambda);
  return (1.0 + 2.0 * inv_var) * std::exp(exponent * std::log(base));
}

double PolarPerturbation::quantile(double u) const {
  if (lambda_std_ == 0.0) return 0.0;
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return grid_max_;
  // Find the grid cell containing u and interpolate linearly inside it.
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
  if (hi == 0) return 0.0;
  const double c0 = cdf_[hi - 1];
  const double c1 = cdf_[hi];
  const double cell = grid_max_ / (cdf_.size() - 1);
  const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return cell * (static_cast<double>(hi - 1) + frac);
}

}  // namespace ghzbell
