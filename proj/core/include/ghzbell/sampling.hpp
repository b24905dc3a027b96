#ifndef GHZBELL_SAMPLING_HPP
#define GHZBELL_SAMPLING_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ghzbell/measurement.hpp"

namespace ghzbell {

// Measurement-choice ensembles.
//
//   kRim:  both directions of every party drawn independently and uniformly
//          on the sphere.
//   kRom:  per party, one uniform direction plus a second drawn uniformly
//          from the great circle orthogonal to it.
//   kProm: per party, an orthogonal pair confined to the plane orthogonal to
//          a shared (or per-party perturbed) reference direction.
enum class SamplerScheme : std::uint8_t { kRim = 0, kRom = 1, kProm = 2 };

const char* to_string(SamplerScheme s);

// Reference direction for PROM ensembles in spherical coordinates:
// n = (cos(alpha) sin(lambda), sin(alpha) sin(lambda), cos(lambda)).
struct SphericalDirection {
  double alpha = 0.0;   // azimuth, radians
  double lambda = 0.0;  // polar angle from +z, radians

  MeasurementDirection to_direction() const;
  bool is_z_axis() const { return lambda == 0.0; }
};

// Full description of one measurement-choice ensemble.  PROM requires
// exactly one of `normal` (shared reference direction, exact) or
// `lambda_std` (per-party reference directions perturbed away from +z with
// polar spread lambda_std); RIM and ROM take neither.
struct SamplerSpec {
  SamplerScheme scheme = SamplerScheme::kRim;
  int n_parties = 0;
  std::uint64_t seed = 0;
  std::optional<SphericalDirection> normal;
  std::optional<double> lambda_std;

  static SamplerSpec rim(int n, std::uint64_t seed);
  static SamplerSpec rom(int n, std::uint64_t seed);
  static SamplerSpec prom_xy(int n, std::uint64_t seed);
  static SamplerSpec prom_rotated(int n, std::uint64_t seed, double alpha,
                                  double lambda);
  static SamplerSpec prom_perturbed(int n, std::uint64_t seed, double lambda_std);

  // Short name for reports: rim, rom, prom-xy, prom, prom-perturbed.
  const char* variant_name() const;

  void validate() const;
};

// A PROM draw in the xy plane: for each party the orthogonal pair
// omega(chi_k) = (cos chi_k, sin chi_k, 0), omega(chi_k + pi/2), with chi_k
// uniform.  `chi` is the total sum of the chi_k, reduced modulo 2 pi.
struct PromXYSample {
  MeasurementConfig config;
  double chi = 0.0;
};

// A perturbed-PROM draw additionally reports the per-party reference
// directions actually used.
struct PerturbedSample {
  MeasurementConfig config;
  std::vector<MeasurementDirection> normals;
};

// All samplers are pure functions of (spec, sample_index): the same pair
// always yields the same configuration, regardless of caller threading.
MeasurementConfig sample_rim(const SamplerSpec& spec, std::uint64_t sample_index = 0);
MeasurementConfig sample_rom(const SamplerSpec& spec, std::uint64_t sample_index = 0);
PromXYSample sample_prom_xy(const SamplerSpec& spec, std::uint64_t sample_index = 0);
MeasurementConfig sample_prom_rotated(const SamplerSpec& spec,
                                      std::uint64_t sample_index = 0);
PerturbedSample sample_perturbed_normals(const SamplerSpec& spec,
                                         std::uint64_t sample_index = 0);

// Dispatches on the spec's scheme/variant.
MeasurementConfig sample_config(const SamplerSpec& spec, std::uint64_t sample_index = 0);

// Distribution of the polar angle of a perturbed reference direction on
// [0, pi/2]: density proportional to
//
//   (1 + 2 / lambda_std^2) * cos(lambda / 2)^(4 / lambda_std^2),
//
// renormalized numerically (the prefactor does not normalize it on
// [0, pi/2]).  For small lambda_std this approaches a half-normal
// distribution with standard deviation lambda_std.  Sampling inverts a
// tabulated CDF (4096 intervals, adaptive-Simpson node values accurate to
// 1e-10); lambda_std = 0 degenerates to the point mass at 0.
class PolarPerturbation {
 public:
  explicit PolarPerturbation(double lambda_std);

  double lambda_std() const { return lambda_std_; }

  // Unnormalized density, zero outside [0, pi/2].
  double density(double lambda) const;

  // Quantile function: maps u in [0, 1) to lambda.
  double quantile(double u) const;

  // CDF grid nodes (4097 values over [0, grid_max]); exposed so that
  // statistical tests can bin draws exactly at the tabulated nodes.
  const std::vector<double>& cdf_nodes() const { return cdf_; }
  double grid_max() const { return grid_max_; }

 private:
  double lambda_std_ = 0.0;
  double grid_max_ = 0.0;
  std::vector<double> cdf_;  // cdf_[i] = P(lambda <= grid_max * i / n_cells)
};

}  // namespace ghzbell

#endif  // GHZBELL_SAMPLING_HPP
