#pragma once
// Expected molecule counts at a passive circular receiver of radius R0:
// impulse and continuous emission from a point source, and the mean field of
// a Poisson population of sources on a disk of radius R1.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "qsmc/core.hpp"
#include "qsmc/quadrature.hpp"
#include "qsmc/specfun.hpp"

namespace qsmc::channel {

enum class Method { ClosedForm, UCA, ExactQuadrature };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed-form";
    case Method::UCA: return "uca";
    case Method::ExactQuadrature: return "exact-quadrature";
  }
  return "unknown";
}

struct ChannelResult {
  double mean_count = 0.0;
  Method method = Method::ClosedForm;
  double err_est = 0.0;
};

namespace detail {

inline void require_degradation(const EnvParams& p, const char* what) {
  if (!(p.degradation > 0.0))
    throw Error(ErrorKind::DegradationRequired, std::string(what) + " diverges without degradation (k = 0)");
}

// K0 that tolerates a zero argument produced by rounding at a coincident
// source and observation point; the singularity is integrable.
inline double k0_floor(double z) { return specfun::bessel_k0(std::max(z, 1e-300)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Point source, impulse emission of one molecule at t = 0.

/// Probability that a molecule released at the origin at time 0 is inside the
/// receiver centred at b at time tau. Integrates the angular closed form
/// 2 pi exp(-(|b|^2 + rho^2) / 4 D tau) I0(|b| rho / 2 D tau) over rho.
inline ChannelResult impulse_response(Point2 b, double tau, const EnvParams& p,
                                      const quad::QuadSpec& spec = quad::QuadSpec::line()) {
  if (!(tau > 0.0)) throw Error(ErrorKind::NonPositive, "tau");
  const double bn = b.norm();
  const double four_dt = 4.0 * p.diffusion * tau;
  const double decay = std::exp(-p.degradation * tau);
  if (bn == 0.0) return {decay * -std::expm1(-p.rx_radius * p.rx_radius / four_dt), Method::ClosedForm, 0.0};
  auto f = [&](double rho) {
    const double d = bn - rho;
    const double x = 2.0 * bn * rho / four_dt;
    return rho * std::exp(-d * d / four_dt) * specfun::bessel_i0_scaled(x);
  };
  std::array<double, 1> brk{bn};
  auto r = quad::integrate_1d(f, 0.0, p.rx_radius, spec, bn < p.rx_radius ? std::span<const double>(brk) : std::span<const double>());
  const double scale = decay * 2.0 / four_dt;
  return {scale * r.value, Method::ExactQuadrature, scale * r.err_est};
}

/// Coefficients of a four-term exponential fit I0(x) ~ sum alpha_i exp(beta_i x)
/// valid over the argument range of interest; supplied by the caller.
struct ExpFitCoefficients {
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};
};

/// Closed form of the impulse response obtained by replacing I0 with an
/// exponential fit. Accuracy is that of the fit.
inline ChannelResult impulse_response_expfit(Point2 b, double tau, const EnvParams& p, const ExpFitCoefficients& c) {
  if (!(tau > 0.0)) throw Error(ErrorKind::NonPositive, "tau");
  const double bn = b.norm();
  const double D = p.diffusion;
  const double R0 = p.rx_radius;
  const double k = p.degradation;
  const double four_dt = 4.0 * D * tau;
  const double sq = 2.0 * std::sqrt(D * tau);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double a = c.alpha[i];
    const double be = c.beta[i];
    // exp(-(R0^2 + b^2)/4Dt - kt) [exp(R0^2/4Dt) - exp(R0 b beta/2Dt)], folded
    // into single exponents to avoid overflow.
    const double t1 = std::exp(-bn * bn / four_dt - k * tau) -
                      std::exp(-(R0 * R0 + bn * bn - 2.0 * R0 * bn * be) / four_dt - k * tau);
    const double t2 = bn * be * std::sqrt(D * std::numbers::pi) / (2.0 * D * std::sqrt(tau)) *
                      std::exp(-bn * bn * (1.0 - be * be) / four_dt - k * tau) *
                      (specfun::erf(bn * be / sq) + specfun::erf((R0 - bn * be) / sq));
    sum += a * (t1 + t2);
  }
  return {sum, Method::ClosedForm, 0.0};
}

/// Impulse response of a receiver centred on the emitter.
inline ChannelResult impulse_self_response(double tau, const EnvParams& p) {
  if (!(tau > 0.0)) throw Error(ErrorKind::NonPositive, "tau");
  const double v = std::exp(-p.degradation * tau) *
                   -std::expm1(-p.rx_radius * p.rx_radius / (4.0 * p.diffusion * tau));
  return {v, Method::ClosedForm, 0.0};
}

// ---------------------------------------------------------------------------
// Point source, continuous emission at rate q.

/// Steady-state count with the concentration taken uniform over the receiver.
inline ChannelResult continuous_response_uca(Point2 b, const EnvParams& p) {
  detail::require_degradation(p, "continuous_response_uca");
  const double bn = b.norm();
  if (!(bn > 0.0)) throw Error(ErrorKind::DomainError, "continuous_response_uca needs |b| > 0");
  const double v = p.emission_rate * p.rx_radius * p.rx_radius / (2.0 * p.diffusion) *
                   specfun::bessel_k0(bn * p.rate_length());
  return {v, Method::UCA, 0.0};
}

/// Steady-state count at a receiver centred on the emitter.
inline ChannelResult continuous_self_response(const EnvParams& p) {
  detail::require_degradation(p, "continuous_self_response");
  const double z = p.rate_length() * p.rx_radius;
  const double v = p.emission_rate / p.degradation * (1.0 - z * specfun::bessel_k1(z));
  return {v, Method::ClosedForm, 0.0};
}

/// Count at time t with no degradation (UCA): E1(|b|^2 / 4Dt) q R0^2 / 4D.
inline ChannelResult continuous_response_nodeg(Point2 b, double t, const EnvParams& p) {
  if (p.degradation != 0.0) throw Error(ErrorKind::DomainError, "continuous_response_nodeg needs k = 0");
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositive, "t");
  const double bn = b.norm();
  if (!(bn > 0.0)) throw Error(ErrorKind::DomainError, "continuous_response_nodeg needs |b| > 0");
  const double v = specfun::expint_e1(bn * bn / (4.0 * p.diffusion * t)) * p.emission_rate * p.rx_radius *
                   p.rx_radius / (4.0 * p.diffusion);
  return {v, Method::ClosedForm, 0.0};
}

enum class ImpulseForm { Exact, UCA };

/// q * int_0^t N_im(b, tau) dtau: the count at time t for emission that
/// started at time 0. With k > 0 this converges to the steady-state forms.
inline ChannelResult continuous_response_time(Point2 b, double t, const EnvParams& p,
                                              ImpulseForm form = ImpulseForm::Exact,
                                              const quad::QuadSpec& spec = quad::QuadSpec::line()) {
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositive, "t");
  const double bn = b.norm();
  const double D = p.diffusion;
  if (form == ImpulseForm::UCA) {
    auto f = [&](double tau) {
      return std::exp(-bn * bn / (4.0 * D * tau) - p.degradation * tau) / (4.0 * std::numbers::pi * D * tau);
    };
    auto r = quad::integrate_1d(f, 0.0, t, spec);
    const double scale = p.emission_rate * std::numbers::pi * p.rx_radius * p.rx_radius;
    return {scale * r.value, Method::UCA, scale * r.err_est};
  }
  quad::QuadSpec inner = spec;
  inner.rel_tol = std::max(spec.rel_tol * 0.1, 1e-13);
  auto f = [&](double tau) { return impulse_response(b, tau, p, inner).mean_count; };
  // The response peaks near tau = |b|^2 / 4D; give the integrator that scale.
  std::array<double, 2> brk{bn * bn / (4.0 * D), p.rx_radius * p.rx_radius / (4.0 * D)};
  auto r = quad::integrate_1d(f, 0.0, t, spec, brk);
  return {p.emission_rate * r.value, Method::ExactQuadrature, p.emission_rate * r.err_est};
}

// ---------------------------------------------------------------------------
// Field of sources.

enum class PointwiseMode { Exact, UCA };

inline const char* to_string(PointwiseMode m) { return m == PointwiseMode::Exact ? "exact" : "uca"; }

/// Steady-state count at the receiver centred at distance l from a single
/// continuously emitting source, integrating the Green's function
/// (q / 2 pi D) K0(sqrt(k/D) Upsilon) over the receiver disk.
inline ChannelResult pointwise_response_at(double l, const EnvParams& p, PointwiseMode mode,
                                           const quad::QuadSpec& spec = quad::QuadSpec::disk()) {
  detail::require_degradation(p, "pointwise_field_response");
  const double c = p.rate_length();
  if (mode == PointwiseMode::UCA) {
    const double v = p.emission_rate * p.rx_radius * p.rx_radius / (2.0 * p.diffusion) * detail::k0_floor(c * l);
    return {v, Method::UCA, 0.0};
  }
  auto inner = [&](const GeometryTerms& g) { return detail::k0_floor(c * g.upsilon); };
  const double v = quad::receiver_disk_integral(inner, l, p.rx_radius, spec);
  const double scale = p.emission_rate / (2.0 * std::numbers::pi * p.diffusion);
  return {scale * v, Method::ExactQuadrature, scale * std::abs(v) * spec.rel_tol};
}

inline ChannelResult pointwise_field_response(Point2 b, Point2 r, const EnvParams& p, PointwiseMode mode,
                                              const quad::QuadSpec& spec = quad::QuadSpec::disk()) {
  return pointwise_response_at(distance(b, r), p, mode, spec);
}

/// Pointwise response as a function of source distance, tabulated once so
/// the field integrals can evaluate it cheaply. UCA mode is evaluated
/// directly (it is a single Bessel call).
class PointwiseResponseTable {
 public:
  PointwiseResponseTable(const EnvParams& p, double lmax, PointwiseMode mode, double rel_tol = 1e-8)
      : params_(p), mode_(mode), lmax_(lmax) {
    detail::require_degradation(p, "PointwiseResponseTable");
    if (mode == PointwiseMode::Exact) {
      quad::QuadSpec spec = quad::QuadSpec::disk();
      spec.rel_tol = std::max(rel_tol * 0.1, 1e-12);
      quad::RadialTable::Options opt;
      opt.rel_tol = rel_tol;
      opt.log_values = true;
      table_ = quad::RadialTable([&](double l) { return pointwise_response_at(l, p, PointwiseMode::Exact, spec).mean_count; },
                                 std::min(p.rx_radius, lmax), lmax, opt);
    }
  }

  double operator()(double l) const {
    if (mode_ == PointwiseMode::UCA) return pointwise_response_at(l, params_, PointwiseMode::UCA).mean_count;
    if (l > lmax_ * (1.0 + 1e-9)) throw Error(ErrorKind::DomainError, "distance beyond tabulated range");
    return table_(l);
  }

  PointwiseMode mode() const { return mode_; }
  double lmax() const { return lmax_; }
  double rx_radius() const { return params_.rx_radius; }

 private:
  EnvParams params_;
  PointwiseMode mode_;
  double lmax_;
  quad::RadialTable table_;
};

/// Radial breakpoints for a disk integral centred at the origin whose
/// integrand depends on the distance to a point at radius `bn`.
inline quad::DiskHints field_hints(double bn, double pop_radius, double rx_radius) {
  quad::DiskHints h;
  h.mirror_symmetric = true;
  for (double d : {bn - rx_radius, bn, bn + rx_radius})
    if (d > 0.0 && d < pop_radius) h.radial_breaks.push_back(d);
  return h;
}

enum class AggregateMode { Exact4D, UCA2D, Center3D, CenterUCAClosed };

inline const char* to_string(AggregateMode m) {
  switch (m) {
    case AggregateMode::Exact4D: return "exact4d";
    case AggregateMode::UCA2D: return "uca2d";
    case AggregateMode::Center3D: return "center3d";
    case AggregateMode::CenterUCAClosed: return "center-uca-closed";
  }
  return "unknown";
}

/// Mean steady-state count at the receiver centred at b from Poisson sources
/// of density `density` on the population disk (Campbell's theorem).
inline ChannelResult aggregate_response_density(Point2 b, const EnvParams& p, double density, AggregateMode mode,
                                                const quad::QuadSpec* spec_override = nullptr) {
  detail::require_degradation(p, "aggregate_response");
  const double bn = b.norm();
  const bool centred = bn == 0.0;
  if ((mode == AggregateMode::Center3D || mode == AggregateMode::CenterUCAClosed) && !centred)
    throw Error(ErrorKind::ModeMismatch, "centre modes need |b| = 0");
  const double c = p.rate_length();
  const double q = p.emission_rate;
  const double D = p.diffusion;
  const double R0 = p.rx_radius;
  const double R1 = p.pop_radius;
  switch (mode) {
    case AggregateMode::CenterUCAClosed: {
      const double v = density * q * std::numbers::pi * R0 * R0 / p.degradation *
                       (1.0 - std::sqrt(p.degradation) * R1 * specfun::bessel_k1(c * R1) / std::sqrt(D));
      return {v, Method::ClosedForm, 0.0};
    }
    case AggregateMode::UCA2D: {
      const quad::QuadSpec spec = spec_override ? *spec_override : quad::QuadSpec::disk();
      auto f = [&](double r, double phi) {
        return detail::k0_floor(c * std::sqrt(GeometryTerms::omega_of(bn, r, phi)));
      };
      auto res = quad::integrate_disk(f, R1, spec, field_hints(bn, R1, 0.0));
      const double scale = density * q * R0 * R0 / (2.0 * D);
      return {scale * res.value, Method::UCA, scale * res.err_est};
    }
    case AggregateMode::Center3D: {
      const quad::QuadSpec spec = spec_override ? *spec_override : quad::QuadSpec::nested();
      quad::QuadSpec inner_spec = spec;
      inner_spec.rel_tol = std::max(spec.rel_tol * 1e-2, 1e-12);
      auto inner = [&](const GeometryTerms& g) { return detail::k0_floor(c * g.upsilon); };
      // With the receiver at the centre the source angle drops out and the
      // integrand depends on |r| only.
      auto f = [&](double r) { return r * quad::receiver_disk_integral(inner, r, R0, inner_spec); };
      std::array<double, 1> brk{R0};
      auto res = quad::integrate_1d(f, 0.0, R1, spec, brk);
      const double scale = density * q / D;
      return {scale * res.value, Method::ExactQuadrature, scale * res.err_est};
    }
    case AggregateMode::Exact4D: {
      const quad::QuadSpec spec = spec_override ? *spec_override : quad::QuadSpec::nested();
      auto inner = [&](const GeometryTerms& g) { return detail::k0_floor(c * g.upsilon); };
      auto res = quad::integrate_nested_4d(inner, R1, R0, b, spec, /*positive_inner=*/true);
      const double scale = density * q / (2.0 * std::numbers::pi * D);
      return {scale * res.value, Method::ExactQuadrature, scale * res.err_est};
    }
  }
  throw Error(ErrorKind::DomainError, "unknown aggregate mode");
}

inline ChannelResult aggregate_response(Point2 b, const EnvParams& p, AggregateMode mode,
                                        const quad::QuadSpec* spec_override = nullptr) {
  return aggregate_response_density(b, p, p.density, mode, spec_override);
}

/// Steady-state count from a uniformly emitting circular source of radius R1
/// (total rate q per unit density), i.e. the aggregate with lambda removed.
inline ChannelResult circular_tx_response(Point2 b, const EnvParams& p, AggregateMode mode = AggregateMode::Exact4D,
                                          const quad::QuadSpec* spec_override = nullptr) {
  return aggregate_response_density(b, p, 1.0, mode, spec_override);
}

// ---------------------------------------------------------------------------
// Time dependence of the field response.

/// Mean count at time t at the receiver centred at b from sources of the
/// given density that began emitting at time 0, with a uniform concentration
/// over the receiver:
///   density q pi R0^2 int_0^t e^{-k tau} / (4 pi D tau) G(tau) dtau,
/// where G is the Gaussian kernel integrated over the population disk.
inline ChannelResult aggregate_response_time(Point2 b, double t, const EnvParams& p, double density,
                                             const quad::QuadSpec& spec = quad::QuadSpec::line()) {
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositive, "t");
  const double bn = b.norm();
  const double D = p.diffusion;
  const double R1 = p.pop_radius;
  quad::QuadSpec inner = spec;
  inner.rel_tol = std::max(spec.rel_tol * 0.1, 1e-12);
  // Fraction-of-kernel form: G(tau) / (4 pi D tau) = P(|b + sqrt(2 D tau) N2| < R1).
  auto disk_mass = [&](double tau) {
    const double four_dt = 4.0 * D * tau;
    if (bn == 0.0) return -std::expm1(-R1 * R1 / four_dt);
    auto g = [&](double r) {
      const double d = bn - r;
      return r * std::exp(-d * d / four_dt) * specfun::bessel_i0_scaled(2.0 * bn * r / four_dt);
    };
    std::array<double, 1> brk{bn};
    auto res = quad::integrate_1d(g, 0.0, R1, inner, bn < R1 ? std::span<const double>(brk) : std::span<const double>());
    return 2.0 * res.value / four_dt;
  };
  auto f = [&](double tau) { return std::exp(-p.degradation * tau) * disk_mass(tau); };
  std::vector<double> brk;
  for (double s : {1e-3, 1e-2, 1e-1, 1.0})
    if (s < t) brk.push_back(s);
  auto res = quad::integrate_1d(f, 0.0, t, spec, brk);
  const double scale = density * p.emission_rate * std::numbers::pi * p.rx_radius * p.rx_radius;
  return {scale * res.value, Method::UCA, scale * res.err_est};
}

/// q * int_0^t N_im,self(tau) dtau: a bacterium's own molecules at time t.
inline ChannelResult self_response_time(double t, const EnvParams& p,
                                        const quad::QuadSpec& spec = quad::QuadSpec::line()) {
  if (!(t > 0.0)) throw Error(ErrorKind::NonPositive, "t");
  auto f = [&](double tau) { return impulse_self_response(tau, p).mean_count; };
  std::array<double, 1> brk{p.rx_radius * p.rx_radius / (4.0 * p.diffusion)};
  auto res = quad::integrate_1d(f, 0.0, t, spec, brk);
  return {p.emission_rate * res.value, Method::ExactQuadrature, p.emission_rate * res.err_est};
}

/// Mean observation at time t of a bacterium at x: its own molecules plus
/// those of the other bacteria (reduced density).
inline ChannelResult observation_mean_time(Point2 x, double t, const EnvParams& p) {
  auto self = self_response_time(t, p);
  auto field = aggregate_response_time(x, t, p, reduced_density(p));
  return {self.mean_count + field.mean_count, Method::UCA, self.err_est + field.err_est};
}

/// Smallest time T (to a 1% bracket) after which the truncated response
/// drifts by less than `drift` between T and 2T.
template <class F>
double plateau_time(const F& response_at, double drift = 1e-3, double t_min = 1e-3, double t_max = 1e3) {
  auto ok = [&](double T) {
    const double a = response_at(T);
    const double b2 = response_at(2.0 * T);
    return std::abs(a - b2) <= drift * std::abs(b2);
  };
  double lo = t_min;
  if (ok(lo)) return lo;
  double hi = lo;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > t_max) throw Error(ErrorKind::NoConvergence, "no plateau before t_max");
  }
  while (hi / lo > 1.01) {
    const double mid = std::sqrt(lo * hi);
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace qsmc::channel
