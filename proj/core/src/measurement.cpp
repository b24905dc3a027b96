#include "ghzbell/measurement.hpp"

#include <cmath>
#include <string>

#include "ghzbell/errors.hpp"
#include "ghzbell/rng.hpp"

namespace ghzbell {

namespace {
constexpr double kPoleSinTol = 1e-12;
}

MeasurementDirection MeasurementDirection::from_angles(double theta, double phi) {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

double MeasurementDirection::polar() const {
  double c = z;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

double MeasurementDirection::azimuth() const {
  if (std::hypot(x, y) < kPoleSinTol) return 0.0;
  return std::atan2(y, x);
}

double MeasurementDirection::dot(const MeasurementDirection& o) const {
  return x * o.x + y * o.y + z * o.z;
}

MeasurementDirection MeasurementDirection::cross(const MeasurementDirection& o) const {
  return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
}

double MeasurementDirection::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool MeasurementDirection::is_unit(double tol) const {
  return std::fabs(norm() - 1.0) <= tol;
}

void MeasurementConfig::validate() const {
  if (n_parties < 1) {
    throw usage_error("measurement config needs at least one party, got " +
                      std::to_string(n_parties));
  }
  if (static_cast<int>(directions.size()) != n_parties) {
    throw usage_error("measurement config direction list has " +
                      std::to_string(directions.size()) + " entries for " +
                      std::to_string(n_parties) + " parties");
  }
  for (int k = 0; k < n_parties; ++k) {
    for (int s = 0; s < 2; ++s) {
      if (!directions[k][s].is_unit()) {
        throw usage_error("direction for party " + std::to_string(k) +
                          ", setting " + std::to_string(s) +
                          " is not unit length within 1e-12");
      }
    }
  }
}

void NoiseSpec::validate() const {
  if (kind == NoiseKind::kNone) return;
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw usage_error("noise strength must lie in [0, 1], got " + std::to_string(nu));
  }
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kDepolarizing: return "depolarizing";
    case NoiseKind::kDephasing: return "dephasing";
  }
  return "unknown";
}

}  // namespace ghzbell
