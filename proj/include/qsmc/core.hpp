#pragma once
// Shared domain types: environment parameters, planar points, geometry terms,
// unit conversions and the library's error type.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsmc {

enum class ErrorKind {
  NonPositive,
  ThresholdNotInteger,
  PopulationTooSparse,
  DomainError,
  NoConvergence,
  DegradationRequired,
  ModeMismatch,
  CapExceeded,
  ConfigInvalid,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::ThresholdNotInteger: return "ThresholdNotInteger";
    case ErrorKind::PopulationTooSparse: return "PopulationTooSparse";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegradationRequired: return "DegradationRequired";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // For NonPositive this is the offending field name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Thrown when an adaptive integrator exhausts its subdivision budget. The
// best estimate reached so far travels with the exception.
class NoConvergence : public Error {
 public:
  NoConvergence(std::string where, std::vector<double> best, std::vector<double> err)
      : Error(ErrorKind::NoConvergence, std::move(where)),
        best_(std::move(best)),
        err_(std::move(err)) {}

  const std::vector<double>& best_estimate() const noexcept { return best_; }
  const std::vector<double>& error_estimate() const noexcept { return err_; }

 private:
  std::vector<double> best_;
  std::vector<double> err_;
};

namespace units {
inline constexpr double um = 1e-6;
inline constexpr double per_um2 = 1e12;

constexpr double from_um(double v) { return v * um; }
constexpr double to_um(double v) { return v / um; }
constexpr double density_from_per_um2(double v) { return v * per_um2; }
constexpr double density_to_per_um2(double v) { return v / per_um2; }
}  // namespace units

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Squared source-to-receiver-centre distance and source-to-receiver-point
/// distance in the polar parametrisation used by the field integrals.
///
/// `b` is the receiver centre, `r` / `phi` locate the emitter (phi is the
/// supplement of the angle between the two vectors, so the emitter coincides
/// with the receiver centre at phi = pi, r = |b|). `r0` / `theta` locate a
/// point inside the receiver disk, with the same supplement convention.
struct GeometryTerms {
  double omega = 0.0;    // m^2
  double upsilon = 0.0;  // m

  static double omega_of(double b, double r, double phi) {
    return std::max(0.0, b * b + r * r + 2.0 * b * r * std::cos(phi));
  }

  static GeometryTerms at(double b, double r, double phi, double r0, double theta) {
    GeometryTerms g;
    g.omega = omega_of(b, r, phi);
    const double l = std::sqrt(g.omega);
    g.upsilon = std::sqrt(std::max(0.0, g.omega + r0 * r0 + 2.0 * l * r0 * std::cos(theta)));
    return g;
  }
};

/// Physical constants of one experiment, SI units throughout.
struct EnvParams {
  double diffusion = 5.5e-10;      // D, m^2/s
  double degradation = 10.0;       // k, 1/s
  double emission_rate = 1000.0;   // q, molecules/s
  double rx_radius = 0.757e-6;     // R0, m
  double pop_radius = 50e-6;       // R1, m
  double density = 100.0 / (std::numbers::pi * 50e-6 * 50e-6);  // lambda, 1/m^2
  double threshold = 1.0;          // eta, molecules (integer valued)

  int eta() const { return static_cast<int>(threshold); }
  double expected_population() const { return density * std::numbers::pi * pop_radius * pop_radius; }
  double rate_length() const { return std::sqrt(degradation / diffusion); }  // sqrt(k/D), 1/m

  // Default experiment: 100 bacteria on average in a 50 um disk.
  static EnvParams defaults() { return EnvParams{}; }

  EnvParams with_population(double r1, double mean_count) const {
    EnvParams p = *this;
    p.pop_radius = r1;
    p.density = mean_count / (std::numbers::pi * r1 * r1);
    return p;
  }
};

enum class Analysis { Channel, Cooperation };

inline EnvParams validate(const EnvParams& raw, Analysis analysis = Analysis::Cooperation) {
  auto require_positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::NonPositive, field);
  };
  require_positive(raw.diffusion, "diffusion");
  require_positive(raw.emission_rate, "emission_rate");
  require_positive(raw.rx_radius, "rx_radius");
  require_positive(raw.pop_radius, "pop_radius");
  if (!(raw.degradation >= 0.0) || !std::isfinite(raw.degradation))
    throw Error(ErrorKind::NonPositive, "degradation");
  if (!(raw.density >= 0.0) || !std::isfinite(raw.density))
    throw Error(ErrorKind::NonPositive, "density");
  if (!(raw.pop_radius > raw.rx_radius))
    throw Error(ErrorKind::DomainError, "pop_radius must exceed rx_radius");
  if (!(raw.threshold >= 1.0)) throw Error(ErrorKind::NonPositive, "threshold");
  if (raw.threshold != std::floor(raw.threshold) || raw.threshold > 1e6)
    throw Error(ErrorKind::ThresholdNotInteger, std::to_string(raw.threshold));
  if (analysis == Analysis::Cooperation && raw.expected_population() < 1.0)
    throw Error(ErrorKind::PopulationTooSparse,
                "lambda*pi*R1^2 = " + std::to_string(raw.expected_population()) + " < 1");
  return raw;
}

/// Density of the other bacteria seen by a bacterium at a fixed location, so
/// that the mean total count stays lambda*pi*R1^2.
inline double reduced_density(const EnvParams& p) {
  const double area = std::numbers::pi * p.pop_radius * p.pop_radius;
  const double mean = p.density * area;
  if (mean < 1.0)
    throw Error(ErrorKind::PopulationTooSparse, "lambda*pi*R1^2 = " + std::to_string(mean) + " < 1");
  return (mean - 1.0) / area;
}

}  // namespace qsmc
