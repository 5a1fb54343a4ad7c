#pragma once
// Statistics of the number of cooperators Z over the bacterial population:
// mean via Campbell's theorem, the Poisson-form MGF/CGF it implies,
// moments, cumulants, shape, PMF/CCDF fits, and nth-neighbour pair counts.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "qsmc/cooperation.hpp"
#include "qsmc/core.hpp"
#include "qsmc/pointprocess.hpp"
#include "qsmc/quadrature.hpp"
#include "qsmc/specfun.hpp"

namespace qsmc::stats {

enum class ProbMode { Exact, Approx };

inline const char* to_string(ProbMode m) { return m == ProbMode::Exact ? "exact" : "approx"; }

/// Cooperating probability as a function of distance from the population
/// centre, for every threshold 1..eta_max. The profile loses smoothness
/// where the receiver starts to overlap the population edge, so it is split
/// at R1 - R0 into two spline pieces with uniform nodes. Each piece doubles
/// its node count until the splines match fresh evaluations at the midpoints
/// to `tol` (absolute, probabilities).
class RadialProfile {
 public:
  RadialProfile(const coop::CooperationModel& model, ProbMode mode, int eta_max, double tol = 1e-5,
                int initial_nodes = 17, int max_nodes = 257)
      : eta_max_(eta_max), radius_(model.params().pop_radius), mode_(mode) {
    if (eta_max < 1) throw Error(ErrorKind::DomainError, "eta_max must be >= 1");
    auto eval = [&](double r) {
      const Point2 x{r, 0.0};
      return mode == ProbMode::Exact ? model.coop_prob_exact_all(x, eta_max) : model.coop_prob_approx_all(x, eta_max);
    };
    split_ = radius_ - model.params().rx_radius;
    inner_ = build_piece(eval, 0.0, split_, initial_nodes, max_nodes, tol, true);
    outer_ = build_piece(eval, split_, radius_, 9, max_nodes, tol, false);
  }

  double prob(int eta, double r) const {
    if (eta < 1 || eta > eta_max_) throw Error(ErrorKind::DomainError, "threshold outside profile range");
    r = std::clamp(std::abs(r), 0.0, radius_);
    const auto& piece = r <= split_ ? inner_ : outer_;
    return std::clamp(piece.splines[static_cast<std::size_t>(eta - 1)](r), 0.0, 1.0);
  }

  int eta_max() const { return eta_max_; }
  double radius() const { return radius_; }
  double split() const { return split_; }
  int nodes() const { return inner_.nodes + outer_.nodes; }
  double max_midpoint_error() const { return std::max(inner_.max_err, outer_.max_err); }
  ProbMode mode() const { return mode_; }

 private:
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

  struct Piece {
    std::vector<Spline> splines;
    int nodes = 0;
    double max_err = 0.0;
  };

  // Fourth-order one-sided slope at the last (dir = -1) or first (dir = +1) node.
  static double end_slope(const std::vector<double>& y, double h, int dir) {
    const std::size_t n = y.size();
    auto at = [&](std::size_t k) { return dir < 0 ? y[n - 1 - k] : y[k]; };
    const double d = n >= 5 ? (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * h)
                            : (at(1) - at(0)) / h;
    return dir < 0 ? -d : d;
  }

  std::vector<Spline> make_splines(const std::vector<std::vector<double>>& rows, double lo, double h,
                                   bool even_at_lo) const {
    std::vector<Spline> out;
    for (int e = 0; e < eta_max_; ++e) {
      std::vector<double> ys(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = rows[i][static_cast<std::size_t>(e)];
      // The profile is even in r, so its slope vanishes at the centre.
      const double left = even_at_lo ? 0.0 : end_slope(ys, h, +1);
      out.emplace_back(ys.begin(), ys.end(), lo, h, left, end_slope(ys, h, -1));
    }
    return out;
  }

  template <class Eval>
  Piece build_piece(const Eval& eval, double lo, double hi, int n, int max_nodes, double tol, bool even_at_lo) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) rows.push_back(eval(lo + (hi - lo) * i / (n - 1)));
    Piece piece;
    while (true) {
      const double h = (hi - lo) / (n - 1);
      piece.splines = make_splines(rows, lo, h, even_at_lo);
      std::vector<std::vector<double>> mids;
      double err = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const double r = lo + h * (i + 0.5);
        mids.push_back(eval(r));
        for (int e = 0; e < eta_max_; ++e)
          err = std::max(err, std::abs(piece.splines[static_cast<std::size_t>(e)](r) - mids.back()[static_cast<std::size_t>(e)]));
      }
      piece.max_err = err;
      piece.nodes = n;
      if (err <= tol || 2 * n - 1 > max_nodes) return piece;
      std::vector<std::vector<double>> merged;
      for (int i = 0; i + 1 < n; ++i) {
        merged.push_back(std::move(rows[static_cast<std::size_t>(i)]));
        merged.push_back(std::move(mids[static_cast<std::size_t>(i)]));
      }
      merged.push_back(std::move(rows.back()));
      rows = std::move(merged);
      n = 2 * n - 1;
    }
  }

  int eta_max_;
  double radius_;
  ProbMode mode_;
  double split_ = 0.0;
  Piece inner_;
  Piece outer_;
};

/// lambda * int_0^R1 P(r) 2 pi r dr for one threshold.
inline double mean_from_profile(const RadialProfile& prof, int eta, double density) {
  auto f = [&](double r) { return prof.prob(eta, r) * 2.0 * std::numbers::pi * r; };
  quad::QuadSpec spec = quad::QuadSpec::line();
  spec.rel_tol = 1e-9;
  spec.abs_tol = 1e-300;
  const std::array<double, 1> brk{prof.split()};
  return density * quad::integrate_1d(f, 0.0, prof.radius(), spec, brk).value;
}

// ---------------------------------------------------------------------------
// Everything below depends on Z only through E{Z}: the approximate MGF is
// that of a Poisson variable with that mean.

inline double mgf(double u, double mean) { return std::exp(std::expm1(u) * mean); }
inline double cgf(double u, double mean) { return std::expm1(u) * mean; }

/// E{Z^n} = sum over partitions of n of n! / prod(m_j! j!^m_j) * mean^(sum m_j).
inline double moment_n(int n, double mean) {
  if (n < 1) throw Error(ErrorKind::DomainError, "moment order must be >= 1");
  if (n > coop::kMaxPartitionOrder) throw Error(ErrorKind::CapExceeded, "moment order exceeds partition cap");
  double s = 0.0;
  for (const auto& t : coop::enumerate_partitions(n)) {
    int parts = 0;
    for (int mj : t.m) parts += mj;
    s += coop::partition_weight(t) * std::pow(mean, parts);
  }
  return std::tgamma(n + 1.0) * s;
}

inline double cumulant_n(int n, double mean) {
  if (n < 1) throw Error(ErrorKind::DomainError, "cumulant order must be >= 1");
  return mean;
}

struct Shape {
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
};

inline Shape shape_stats(double mean) {
  if (!(mean > 0.0)) throw Error(ErrorKind::DomainError, "shape statistics need E{Z} > 0");
  return {1.0 / std::sqrt(mean), 1.0 / mean};
}

enum class FitModel { Poisson, Gaussian };

inline const char* to_string(FitModel m) { return m == FitModel::Poisson ? "poisson" : "gaussian"; }

inline double poisson_pmf(double mean, int z) {
  if (z < 0) return 0.0;
  if (mean == 0.0) return z == 0 ? 1.0 : 0.0;
  return std::exp(z * std::log(mean) - mean - std::lgamma(z + 1.0));
}

/// Fitted probability of Z = z. The Gaussian is discretised over
/// [z - 1/2, z + 1/2]; a zero variance puts all mass on round(mean).
inline double fit_pmf(FitModel model, double mean, double variance, int z) {
  if (z < 0) throw Error(ErrorKind::DomainError, "fit_pmf needs z >= 0");
  if (model == FitModel::Poisson) return poisson_pmf(mean, z);
  if (!(variance > 0.0)) return z == static_cast<int>(std::lround(mean)) ? 1.0 : 0.0;
  const double s = std::sqrt(2.0 * variance);
  return 0.5 * (std::erf((z + 0.5 - mean) / s) - std::erf((z - 0.5 - mean) / s));
}

/// P(Z >= z_min) under the fitted model.
inline double ccdf(FitModel model, double mean, double variance, int z_min) {
  if (z_min < 0) throw Error(ErrorKind::DomainError, "ccdf needs z_min >= 0");
  if (z_min == 0) return 1.0;
  if (model == FitModel::Poisson) return 1.0 - specfun::reg_gamma_q(z_min, mean);
  if (!(variance > 0.0)) return std::lround(mean) >= z_min ? 1.0 : 0.0;
  return 0.5 * std::erfc((z_min - 0.5 - mean) / std::sqrt(2.0 * variance));
}

struct CoopStats {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> moments;    // E{Z^n}, n = 1..n_max
  std::vector<double> cumulants;  // kappa(n), n = 1..n_max
  double skewness = 0.0;
  double kurtosis = 0.0;
};

inline CoopStats coop_stats(double mean, int n_max = 4) {
  CoopStats s;
  s.mean = mean;
  s.variance = cumulant_n(2, mean);
  for (int n = 1; n <= n_max; ++n) {
    s.moments.push_back(moment_n(n, mean));
    s.cumulants.push_back(cumulant_n(n, mean));
  }
  if (mean > 0.0) {
    const auto sh = shape_stats(mean);
    s.skewness = sh.skewness;
    s.kurtosis = sh.kurtosis;
  }
  return s;
}

// ---------------------------------------------------------------------------

/// Population-level model: one cooperation model plus the radial profile.
class PopulationModel {
 public:
  PopulationModel(const EnvParams& p, ProbMode mode, int eta_max, coop::CoopOptions opt = {}, double profile_tol = 1e-5)
      : coop_(std::make_shared<coop::CooperationModel>(p, opt)),
        profile_(std::make_shared<RadialProfile>(*coop_, mode, eta_max, profile_tol)) {}

  const coop::CooperationModel& cooperation() const { return *coop_; }
  const RadialProfile& profile() const { return *profile_; }
  const EnvParams& params() const { return coop_->params(); }

  double mean_cooperators(int eta) const { return mean_from_profile(*profile_, eta, params().density); }

  std::vector<double> mean_cooperators_all() const {
    std::vector<double> out;
    for (int e = 1; e <= profile_->eta_max(); ++e) out.push_back(mean_cooperators(e));
    return out;
  }

  /// Expected number of bacteria that cooperate together with their nth
  /// nearest neighbour. The neighbour-distance density is the infinite-plane
  /// one and is integrated over the population disk without renormalising.
  double pair_coop_count(int n, int eta) const {
    if (n < 1) throw Error(ErrorKind::DomainError, "pair_coop_count needs n >= 1");
    const double lambda = params().density;
    const double R1 = params().pop_radius;
    quad::QuadSpec inner = quad::QuadSpec::disk();
    inner.rel_tol = 1e-8;
    inner.abs_tol = 1e-300;
    auto partner = [&](double r1) {
      auto g = [&](double r2, double psi) {
        const double d = std::sqrt(GeometryTerms::omega_of(r1, r2, psi));
        if (d <= 0.0) return 0.0;
        return profile_->prob(eta, r2) * pp::nn_distance_pdf(n, d, lambda) / (2.0 * std::numbers::pi * d);
      };
      quad::DiskHints h;
      h.mirror_symmetric = true;
      for (double c : {r1, profile_->split()})
        if (c > 0.0 && c < R1) h.radial_breaks.push_back(c);
      return quad::integrate_disk(g, R1, inner, h).value;
    };
    auto outer = [&](double r1) { return profile_->prob(eta, r1) * partner(r1) * 2.0 * std::numbers::pi * r1; };
    quad::QuadSpec spec = quad::QuadSpec::disk();
    spec.abs_tol = 1e-300;
    const std::array<double, 1> brk{profile_->split()};
    return lambda * quad::integrate_1d(outer, 0.0, R1, spec, brk).value;
  }

 private:
  std::shared_ptr<coop::CooperationModel> coop_;
  std::shared_ptr<RadialProfile> profile_;
};

inline double mean_cooperators(const EnvParams& p, ProbMode mode, coop::CoopOptions opt = {}) {
  return PopulationModel(p, mode, p.eta(), opt).mean_cooperators(p.eta());
}

/// Monte Carlo estimate of the exact MGF E{prod_i h(x_i)} over `realizations`
/// population draws, with h the per-bacterium cooperation indicator MGF given
/// the positions. Also returns the conditional mean and variance of Z.
struct ExactMgfEstimate {
  double mgf = 0.0;
  double mgf_stderr = 0.0;
  double mean_z = 0.0;
  double var_z = 0.0;
};

inline ExactMgfEstimate mgf_exact_mc(double u, const coop::CooperationModel& model, int realizations,
                                     std::uint64_t seed) {
  const auto& p = model.params();
  const int eta = p.eta();
  const auto& tab = model.table();
  std::vector<double> h_prod(static_cast<std::size_t>(realizations));
  std::vector<double> zs(static_cast<std::size_t>(realizations));
  std::vector<double> zsq(static_cast<std::size_t>(realizations));
  for (int rlz = 0; rlz < realizations; ++rlz) {
    auto rng = pp::make_engine(seed, static_cast<std::uint64_t>(rlz), 0);
    const auto pts = pp::sample_disk_points(p.density, p.pop_radius, rng);
    double log_prod = 0.0;
    double ez = 0.0;
    double varz = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double m = model.self_term();
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != i) m += tab(distance(pts[i], pts[j]));
      const double pc = 1.0 - specfun::reg_gamma_q(eta, m);
      log_prod += std::log1p(std::expm1(u) * pc);
      ez += pc;
      varz += pc * (1.0 - pc);
    }
    h_prod[static_cast<std::size_t>(rlz)] = std::exp(log_prod);
    zs[static_cast<std::size_t>(rlz)] = ez;
    zsq[static_cast<std::size_t>(rlz)] = varz + ez * ez;
  }
  ExactMgfEstimate out;
  double s = 0.0, s2 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < realizations; ++i) {
    s += h_prod[static_cast<std::size_t>(i)];
    s2 += h_prod[static_cast<std::size_t>(i)] * h_prod[static_cast<std::size_t>(i)];
    m1 += zs[static_cast<std::size_t>(i)];
    m2 += zsq[static_cast<std::size_t>(i)];
  }
  const double n = realizations;
  out.mgf = s / n;
  out.mgf_stderr = realizations > 1 ? std::sqrt(std::max(0.0, (s2 / n - out.mgf * out.mgf) / (n - 1.0))) : 0.0;
  out.mean_z = m1 / n;
  out.var_z = m2 / n - out.mean_z * out.mean_z;
  return out;
}

}  // namespace qsmc::stats
