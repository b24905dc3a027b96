#ifndef GHZBELL_MEASUREMENT_HPP
#define GHZBELL_MEASUREMENT_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace ghzbell {

// A measurement direction: the unit Bloch vector of a spin observable
// sigma . omega with outcomes +1 / -1.
struct MeasurementDirection {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  static MeasurementDirection from_angles(double theta, double phi);

  // Polar angle in [0, pi], measured from +z.
  double polar() const;

  // Azimuthal angle in (-pi, pi].  At the poles (sin(theta) below 1e-12 in
  // magnitude) the azimuth is ill-defined and reported as 0.
  double azimuth() const;

  double dot(const MeasurementDirection& o) const;
  MeasurementDirection cross(const MeasurementDirection& o) const;
  double norm() const;

  // True when |norm - 1| <= tol.
  bool is_unit(double tol = 1e-12) const;
};

// One two-setting measurement scenario: for each of n_parties observers,
// the pair of directions (setting 0, setting 1) they may measure.
struct MeasurementConfig {
  int n_parties = 0;
  std::vector<std::array<MeasurementDirection, 2>> directions;

  MeasurementConfig() = default;
  explicit MeasurementConfig(int n) : n_parties(n), directions(n) {}

  const MeasurementDirection& direction(int party, int setting) const {
    return directions[party][setting];
  }

  // Throws usage_error unless n_parties >= 1, the direction list matches
  // n_parties, and every direction is unit length within 1e-12.
  void validate() const;
};

enum class NoiseKind : std::uint8_t {
  kNone = 0,
  kDepolarizing = 1,
  kDephasing = 2,
};

// Single-parameter local noise applied independently to every qubit before
// measurement.  nu = 0 is noiseless; nu = 1 fully mixes (depolarizing) or
// fully dephases in the computational basis.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double nu = 0.0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec depolarizing(double nu) { return {NoiseKind::kDepolarizing, nu}; }
  static NoiseSpec dephasing(double nu) { return {NoiseKind::kDephasing, nu}; }

  // Throws usage_error unless nu is in [0, 1] (and 0 when kind is kNone is
  // not required: a kNone spec ignores nu).
  void validate() const;
};

const char* to_string(NoiseKind kind);

}  // namespace ghzbell

#endif  // GHZBELL_MEASUREMENT_HPP
