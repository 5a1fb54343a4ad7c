#pragma once
// Adaptive Gauss-Kronrod integration over intervals, half-lines, disks and
// the disk-over-disk products that appear in the aggregate field integrals.
//
// Integrands may return `double` or `std::array<double, N>`; the vector form
// lets several moments of the same field share one adaptive mesh.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qsmc/core.hpp"

namespace qsmc::quad {

struct QuadSpec {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_subdiv = 4000;

  void check() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw Error(ErrorKind::DomainError, "rel_tol must lie in (0, 1e-2]");
    if (!(abs_tol >= 0.0)) throw Error(ErrorKind::DomainError, "abs_tol must be >= 0");
    if (max_subdiv < 1) throw Error(ErrorKind::DomainError, "max_subdiv must be >= 1");
  }

  static QuadSpec line() { return {1e-8, 0.0, 4000}; }
  static QuadSpec disk() { return {1e-6, 0.0, 2000}; }
  static QuadSpec nested() { return {1e-4, 0.0, 1000}; }
};

// Per-component access for the supported integrand value types.
template <class V>
struct value_traits;

template <>
struct value_traits<double> {
  static constexpr std::size_t size = 1;
  static double get(const double& v, std::size_t) { return v; }
  static double& get(double& v, std::size_t) { return v; }
  static double zero() { return 0.0; }
};

template <std::size_t N>
struct value_traits<std::array<double, N>> {
  static constexpr std::size_t size = N;
  static double get(const std::array<double, N>& v, std::size_t i) { return v[i]; }
  static double& get(std::array<double, N>& v, std::size_t i) { return v[i]; }
  static std::array<double, N> zero() { return {}; }
};

template <class V>
void accumulate(V& acc, double w, const V& x) {
  using T = value_traits<V>;
  for (std::size_t i = 0; i < T::size; ++i) T::get(acc, i) += w * T::get(x, i);
}

template <class V>
std::vector<double> to_vector(const V& v) {
  using T = value_traits<V>;
  std::vector<double> out(T::size);
  for (std::size_t i = 0; i < T::size; ++i) out[i] = T::get(v, i);
  return out;
}

template <class V>
struct QuadResult {
  V value = value_traits<V>::zero();
  V err_est = value_traits<V>::zero();
  int subdivisions = 0;
  bool converged = true;
};

namespace detail {

// 21-point Kronrod rule with its embedded 10-point Gauss rule on [-1, 1].
struct KronrodRule {
  std::array<double, 21> x{};
  std::array<double, 21> wk{};
  std::array<double, 21> wg{};

  KronrodRule() {
    using gk = boost::math::quadrature::gauss_kronrod<double, 21>;
    using g = boost::math::quadrature::gauss<double, 10>;
    const auto& ax = gk::abscissa();
    const auto& w = gk::weights();
    const auto& gw = g::weights();
    x[0] = 0.0;
    wk[0] = w[0];
    wg[0] = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 1; i < ax.size(); ++i) {
      const double g_weight = (i % 2 == 1) ? gw[i / 2] : 0.0;
      x[j] = ax[i];
      wk[j] = w[i];
      wg[j] = g_weight;
      ++j;
      x[j] = -ax[i];
      wk[j] = w[i];
      wg[j] = g_weight;
      ++j;
    }
  }

  static const KronrodRule& get() {
    static const KronrodRule rule;
    return rule;
  }
};

template <class V>
struct Segment {
  double a;
  double b;
  V value;
  V err;
};

template <class V, class F>
Segment<V> apply_rule(const F& f, double a, double b) {
  using T = value_traits<V>;
  const auto& rule = KronrodRule::get();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  V k = T::zero();
  V g = T::zero();
  for (std::size_t i = 0; i < 21; ++i) {
    const V fx = f(c + h * rule.x[i]);
    accumulate(k, rule.wk[i], fx);
    if (rule.wg[i] != 0.0) accumulate(g, rule.wg[i], fx);
  }
  V err = T::zero();
  for (std::size_t i = 0; i < T::size; ++i) {
    T::get(k, i) *= h;
    const double kv = T::get(k, i);
    const double gv = T::get(g, i) * h;
    T::get(err, i) = std::max(std::abs(kv - gv), 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kv));
  }
  return {a, b, k, err};
}

}  // namespace detail

/// Adaptive integral of `f` over [a, b] with optional interior breakpoints.
/// Never throws on budget exhaustion; inspect `converged`.
template <class F>
auto integrate_interval_nothrow(const F& f, double a, double b, const QuadSpec& spec,
                                std::span<const double> breaks = {}) {
  using V = std::decay_t<decltype(f(a))>;
  using T = value_traits<V>;
  QuadResult<V> out;
  if (a == b) return out;
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);

  std::vector<double> cuts{lo};
  for (double c : breaks)
    if (c > lo && c < hi) cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<detail::Segment<V>> segs;
  segs.reserve(static_cast<std::size_t>(spec.max_subdiv) + cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) segs.push_back(detail::apply_rule<V>(f, cuts[i], cuts[i + 1]));

  // Running totals drive the stopping test; the reported sum is recomputed
  // in left-to-right order so results do not depend on refinement history.
  V val = T::zero();
  V err = T::zero();
  for (const auto& s : segs) {
    accumulate(val, 1.0, s.value);
    accumulate(err, 1.0, s.err);
  }
  int splits = 0;
  while (true) {
    std::array<double, T::size> tol{};
    bool done = true;
    for (std::size_t i = 0; i < T::size; ++i) {
      tol[i] = std::max(spec.rel_tol * std::abs(T::get(val, i)), spec.abs_tol);
      if (T::get(err, i) > tol[i]) done = false;
    }
    if (done) break;
    if (splits >= spec.max_subdiv) {
      out.converged = false;
      break;
    }
    // Bisect the segment contributing most to the worst component.
    std::size_t worst = segs.size();
    double worst_score = 0.0;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const double width = segs[s].b - segs[s].a;
      if (width <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(segs[s].a), std::abs(segs[s].b)))
        continue;
      double score = 0.0;
      for (std::size_t i = 0; i < T::size; ++i) {
        const double t = tol[i] > 0.0 ? tol[i] : std::numeric_limits<double>::min();
        score = std::max(score, T::get(segs[s].err, i) / t);
      }
      if (score > worst_score) {
        worst_score = score;
        worst = s;
      }
    }
    if (worst == segs.size()) {
      out.converged = false;
      break;
    }
    const auto seg = segs[worst];
    const double mid = 0.5 * (seg.a + seg.b);
    segs[worst] = detail::apply_rule<V>(f, seg.a, mid);
    segs.push_back(detail::apply_rule<V>(f, mid, seg.b));
    accumulate(val, -1.0, seg.value);
    accumulate(err, -1.0, seg.err);
    for (const auto* s : {&segs[worst], &segs.back()}) {
      accumulate(val, 1.0, s->value);
      accumulate(err, 1.0, s->err);
    }
    ++splits;
  }
  std::sort(segs.begin(), segs.end(), [](const auto& p, const auto& q) { return p.a < q.a; });
  val = T::zero();
  err = T::zero();
  for (const auto& s : segs) {
    accumulate(val, 1.0, s.value);
    accumulate(err, 1.0, s.err);
  }
  for (std::size_t i = 0; i < T::size; ++i) {
    T::get(val, i) *= sign;
  }
  out.value = val;
  out.err_est = err;
  out.subdivisions = splits;
  return out;
}

template <class V>
[[noreturn]] void throw_no_convergence(const char* where, const QuadResult<V>& r) {
  throw NoConvergence(where, to_vector(r.value), to_vector(r.err_est));
}

/// Integral of `f` over [a, b]. `b` may be +infinity; the half-line is mapped
/// onto [0, 1) by x = a + u / (1 - u).
template <class F>
auto integrate_1d(const F& f, double a, double b, const QuadSpec& spec = QuadSpec::line(),
                  std::span<const double> breaks = {}) {
  spec.check();
  using V = std::decay_t<decltype(f(a))>;
  QuadResult<V> r;
  if (std::isinf(b)) {
    if (b < 0.0 || std::isinf(a)) throw Error(ErrorKind::DomainError, "integrate_1d supports [a, +inf) only");
    auto g = [&](double u) -> V {
      const double one_minus = 1.0 - u;
      if (one_minus <= 0.0) return value_traits<V>::zero();
      const double x = a + u / one_minus;
      if (std::isinf(x)) return value_traits<V>::zero();
      V v = f(x);
      const double jac = 1.0 / (one_minus * one_minus);
      for (std::size_t i = 0; i < value_traits<V>::size; ++i) value_traits<V>::get(v, i) *= jac;
      return v;
    };
    std::vector<double> ubreaks;
    for (double x : breaks)
      if (x > a) ubreaks.push_back((x - a) / (1.0 + (x - a)));
    r = integrate_interval_nothrow(g, 0.0, 1.0, spec, ubreaks);
  } else {
    r = integrate_interval_nothrow(f, a, b, spec, breaks);
  }
  if (!r.converged) throw_no_convergence("integrate_1d", r);
  return r;
}

/// Hints that let the disk integrator place subdivision points on the
/// integrand's singular lines.
struct DiskHints {
  std::vector<double> radial_breaks;
  std::vector<double> angular_breaks;
  // f(r, phi) == f(r, 2 pi - phi): integrate phi over [0, pi] and double.
  bool mirror_symmetric = false;
};

/// Integral of f(r, phi) r dphi dr over the disk of radius R.
template <class F>
auto integrate_disk(const F& f, double radius, const QuadSpec& spec = QuadSpec::disk(), const DiskHints& hints = {}) {
  spec.check();
  using V = std::decay_t<decltype(f(0.0, 0.0))>;
  using T = value_traits<V>;
  if (!(radius >= 0.0)) throw Error(ErrorKind::DomainError, "integrate_disk needs radius >= 0");
  QuadSpec inner_spec = spec;
  inner_spec.rel_tol = std::max(spec.rel_tol * 0.1, 1e-13);
  inner_spec.abs_tol = spec.abs_tol * 0.1 / std::max(1.0, radius);
  const double phi_hi = hints.mirror_symmetric ? std::numbers::pi : 2.0 * std::numbers::pi;
  const double phi_factor = hints.mirror_symmetric ? 2.0 : 1.0;
  bool inner_ok = true;
  auto radial = [&](double r) -> V {
    auto ang = [&](double phi) { return f(r, phi); };
    auto res = integrate_interval_nothrow(ang, 0.0, phi_hi, inner_spec, hints.angular_breaks);
    if (!res.converged) inner_ok = false;
    V v = res.value;
    for (std::size_t i = 0; i < T::size; ++i) T::get(v, i) *= phi_factor * r;
    return v;
  };
  auto r = integrate_interval_nothrow(radial, 0.0, radius, spec, hints.radial_breaks);
  if (!r.converged || !inner_ok) throw_no_convergence("integrate_disk", r);
  return r;
}

/// Piecewise cubic spline of a function of distance l on [0, lmax], split at
/// `knee`: uniform nodes on [0, knee], log-uniform nodes on [knee, lmax].
/// Node counts double until every midpoint matches the function to
/// `rel_tol` (relative to the local value, or to the table maximum when
/// `log_values` is false).
class RadialTable {
 public:
  struct Options {
    double rel_tol = 1e-7;
    int initial_nodes = 33;
    int max_nodes = 1025;
    bool log_values = false;
  };

  RadialTable() = default;

  template <class F>
  RadialTable(const F& f, double knee, double lmax, Options opt) : knee_(knee), lmax_(lmax), log_(opt.log_values) {
    if (!(knee > 0.0) || !(lmax > 0.0)) throw Error(ErrorKind::DomainError, "RadialTable needs positive extents");
    auto transform = [&](double v) { return log_ ? std::log(v) : v; };
    auto fv = [&](double l) {
      const double v = f(l);
      if (log_ && !(v > 0.0)) throw Error(ErrorKind::DomainError, "RadialTable log mode needs positive values");
      return v;
    };
    const double inner_end = std::min(knee, lmax);
    inner_ = build(fv, transform, 0.0, inner_end, opt, /*log_axis=*/false);
    has_outer_ = lmax > knee;
    if (has_outer_) outer_ = build(fv, transform, std::log(knee), std::log(lmax), opt, /*log_axis=*/true);
  }

  double operator()(double l) const {
    if (l < 0.0) l = -l;
    double v;
    if (!has_outer_ || l <= knee_) {
      v = inner_.spline(std::min(l, inner_.hi));
    } else {
      v = outer_.spline(std::log(std::min(l, lmax_)));
    }
    return log_ ? std::exp(v) : v;
  }

  double knee() const { return knee_; }
  double lmax() const { return lmax_; }
  int node_count() const { return inner_.nodes + (has_outer_ ? outer_.nodes : 0); }
  double max_midpoint_error() const { return std::max(inner_.max_err, has_outer_ ? outer_.max_err : 0.0); }

 private:
  struct Piece {
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
    double lo = 0.0;
    double hi = 0.0;
    int nodes = 0;
    double max_err = 0.0;
  };

  template <class FV, class TR>
  Piece build(const FV& fv, const TR& transform, double lo, double hi, const Options& opt, bool log_axis) {
    auto to_l = [&](double u) { return log_axis ? std::exp(u) : u; };
    int n = std::max(opt.initial_nodes, 5);
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ys[i] = transform(fv(to_l(lo + (hi - lo) * i / (n - 1))));
    while (true) {
      const double h = (hi - lo) / (n - 1);
      // Fourth-order one-sided end slopes; the spline's own estimate is
      // second order and dominates the error near both ends.
      const double d_lo = (-25 * ys[0] + 48 * ys[1] - 36 * ys[2] + 16 * ys[3] - 3 * ys[4]) / (12 * h);
      const double d_hi =
          (25 * ys[n - 1] - 48 * ys[n - 2] + 36 * ys[n - 3] - 16 * ys[n - 4] + 3 * ys[n - 5]) / (12 * h);
      boost::math::interpolators::cardinal_cubic_b_spline<double> s(ys.begin(), ys.end(), lo, h, d_lo, d_hi);
      std::vector<double> mids(static_cast<std::size_t>(n - 1));
      double scale = 0.0;
      for (double y : ys) scale = std::max(scale, std::abs(log_ ? 1.0 : y));
      double max_err = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const double u = lo + h * (i + 0.5);
        mids[i] = transform(fv(to_l(u)));
        const double diff = std::abs(s(u) - mids[i]);
        // In log mode a difference in log value is a relative error.
        const double e = log_ ? diff : diff / std::max(scale, std::numeric_limits<double>::min());
        max_err = std::max(max_err, e);
      }
      if (max_err <= opt.rel_tol || 2 * n - 1 > opt.max_nodes) {
        Piece p{std::move(s), lo, hi, n, max_err};
        return p;
      }
      std::vector<double> merged;
      merged.reserve(static_cast<std::size_t>(2 * n - 1));
      for (int i = 0; i + 1 < n; ++i) {
        merged.push_back(ys[i]);
        merged.push_back(mids[i]);
      }
      merged.push_back(ys.back());
      ys = std::move(merged);
      n = 2 * n - 1;
    }
  }

  Piece inner_{};
  Piece outer_{};
  double knee_ = 0.0;
  double lmax_ = 0.0;
  bool log_ = false;
  bool has_outer_ = false;
};

/// Inner receiver-disk integral as a function of the source-to-centre
/// distance l: int_0^R0 int_0^2pi inner(Omega = l^2, Upsilon) r0 dtheta dr0.
template <class F>
double receiver_disk_integral(const F& inner, double l, double rx_radius, const QuadSpec& spec) {
  const double omega = l * l;
  auto f = [&](double r0, double theta) {
    GeometryTerms g;
    g.omega = omega;
    g.upsilon = std::sqrt(std::max(0.0, omega + r0 * r0 + 2.0 * l * r0 * std::cos(theta)));
    return inner(g);
  };
  DiskHints hints;
  hints.mirror_symmetric = true;
  if (l > 0.0 && l < rx_radius) hints.radial_breaks.push_back(l);
  return integrate_disk(f, rx_radius, spec, hints).value;
}

/// The disk-over-disk integral
///   int_{|r|<R1} int_{|r0|<R0} inner(GeometryTerms(b, r, r0)) dA0 dA.
/// The inner integral depends on the emitter only through |b - r|, so it is
/// tabulated once on a radial grid and the outer integral reads the table.
/// Set `positive_inner` when the inner integrand is strictly positive; the
/// table then interpolates log values, which keeps relative accuracy in
/// tails that decay over many orders of magnitude.
template <class F>
QuadResult<double> integrate_nested_4d(const F& inner, double pop_radius, double rx_radius, Point2 b,
                                       const QuadSpec& spec = QuadSpec::nested(), bool positive_inner = false) {
  spec.check();
  const double bn = b.norm();
  const double lmax = bn + pop_radius;
  QuadSpec inner_spec = spec;
  inner_spec.rel_tol = std::max(spec.rel_tol * 1e-2, 1e-12);
  inner_spec.abs_tol = 0.0;
  RadialTable::Options opt;
  opt.rel_tol = spec.rel_tol * 0.1;
  opt.log_values = positive_inner;
  RadialTable table([&](double l) { return receiver_disk_integral(inner, l, rx_radius, inner_spec); },
                    std::min(rx_radius, lmax), lmax, opt);
  auto outer = [&](double r, double phi) { return table(std::sqrt(GeometryTerms::omega_of(bn, r, phi))); };
  DiskHints hints;
  hints.mirror_symmetric = true;
  if (bn > 0.0 && bn < pop_radius) hints.radial_breaks.push_back(bn);
  for (double d : {bn - rx_radius, bn + rx_radius})
    if (d > 0.0 && d < pop_radius) hints.radial_breaks.push_back(d);
  QuadSpec outer_spec = spec;
  outer_spec.rel_tol = spec.rel_tol * 0.1;
  auto res = integrate_disk(outer, pop_radius, outer_spec, hints);
  res.err_est += std::abs(res.value) * table.max_midpoint_error();
  return res;
}

}  // namespace qsmc::quad
