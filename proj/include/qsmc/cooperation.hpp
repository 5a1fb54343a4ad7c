#pragma once
// Probability that a bacterium at a fixed location observes at least eta
// molecules, averaged over the random positions of the other bacteria.
//
// Exact route: the observation is Poisson given the positions, so
//   P(N >= eta) = 1 - sum_{n < eta} E[e^{-M} M^n / n!],
// with M the conditional mean. The expectations are derivatives of the
// Laplace transform of M, expanded with Faa di Bruno's formula over integer
// partitions. Approximate route: a Poisson count whose mean is E[M].

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "qsmc/channel.hpp"
#include "qsmc/core.hpp"
#include "qsmc/quadrature.hpp"
#include "qsmc/specfun.hpp"

namespace qsmc::coop {

inline constexpr int kMaxPartitionOrder = 12;

/// Multiplicities (m_1, ..., m_n) with sum_j j m_j = n; m[j - 1] holds m_j.
struct PartitionTuple {
  std::vector<int> m;

  int order() const {
    int n = 0;
    for (std::size_t j = 0; j < m.size(); ++j) n += static_cast<int>(j + 1) * m[j];
    return n;
  }
};

/// All integer partitions of n as multiplicity tuples, in a fixed order.
inline std::vector<PartitionTuple> enumerate_partitions(int n) {
  if (n < 0) throw Error(ErrorKind::DomainError, "enumerate_partitions needs n >= 0");
  if (n > kMaxPartitionOrder)
    throw Error(ErrorKind::CapExceeded, "partition order " + std::to_string(n) + " exceeds " +
                                            std::to_string(kMaxPartitionOrder));
  std::vector<PartitionTuple> out;
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  if (n == 0) {
    out.push_back({m});
    return out;
  }
  // Choose m_j from the largest part down; `left` is what remains to cover.
  auto rec = [&](auto&& self, int j, int left) -> void {
    if (j == 0) {
      if (left == 0) out.push_back({m});
      return;
    }
    for (int c = left / j; c >= 0; --c) {
      m[static_cast<std::size_t>(j - 1)] = c;
      self(self, j - 1, left - c * j);
    }
    m[static_cast<std::size_t>(j - 1)] = 0;
  };
  rec(rec, n, n);
  return out;
}

/// Weight 1 / prod_j (m_j! (j!)^{m_j}) of one partition.
inline double partition_weight(const PartitionTuple& t) {
  double lw = 0.0;
  for (std::size_t j = 0; j < t.m.size(); ++j) {
    const int mj = t.m[j];
    if (mj == 0) continue;
    lw -= std::lgamma(mj + 1.0) + mj * std::lgamma(static_cast<double>(j + 2));
  }
  return std::exp(lw);
}

/// sum over partitions of n of weight * prod_j g[j]^{m_j}; g[j] is indexed
/// from 1 (g[0] unused).
inline double partition_sum(int n, const std::vector<double>& g) {
  double s = 0.0;
  for (const auto& t : enumerate_partitions(n)) {
    double term = partition_weight(t);
    for (std::size_t j = 0; j < t.m.size(); ++j)
      if (t.m[j] > 0) term *= std::pow(g[j + 1], t.m[j]);
    s += term;
  }
  return s;
}

/// Field integrals at one location, with rho = -1:
///   j_moments[j] = lambda' int N(x|r)^j exp(-N(x|r)) dA, j = 1..12,
///   field_loss   = lambda' int (1 - exp(-N(x|r))) dA,
///   self_term    = the bacterium's own steady-state count.
struct LaplaceMoments {
  std::array<double, kMaxPartitionOrder + 1> j_moments{};
  double field_loss = 0.0;
  double self_term = 0.0;

  /// Laplace transform of the conditional mean at s = 1.
  double laplace_at_one() const { return std::exp(-self_term - field_loss); }
};

struct CoopOptions {
  channel::PointwiseMode pointwise = channel::PointwiseMode::Exact;
  // Aggregate used for the mean in the Poisson shortcut.
  channel::AggregateMode approx_aggregate = channel::AggregateMode::UCA2D;
  quad::QuadSpec spec = quad::QuadSpec::disk();
  double table_rel_tol = 1e-8;
};

/// Cooperation quantities for one parameter set. Holds the pointwise
/// response table so repeated locations share it.
class CooperationModel {
 public:
  explicit CooperationModel(const EnvParams& raw, CoopOptions opt = {})
      : params_(validate(raw, Analysis::Cooperation)), opt_(opt) {
    channel::detail::require_degradation(params_, "cooperation");
    reduced_ = reduced_density(params_);
    self_ = channel::continuous_self_response(params_).mean_count;
    table_ = std::make_shared<channel::PointwiseResponseTable>(params_, 2.0 * params_.pop_radius, opt_.pointwise,
                                                               opt_.table_rel_tol);
  }

  const EnvParams& params() const { return params_; }
  const CoopOptions& options() const { return opt_; }
  double reduced() const { return reduced_; }
  double self_term() const { return self_; }
  const channel::PointwiseResponseTable& table() const { return *table_; }

  /// One adaptive pass over the population disk for all field integrals.
  LaplaceMoments moments(Point2 x) const {
    const double xn = x.norm();
    const auto& tab = *table_;
    auto f = [&](double r, double phi) {
      const double nbar = tab(std::sqrt(GeometryTerms::omega_of(xn, r, phi)));
      std::array<double, kMaxPartitionOrder + 1> v{};
      const double e = std::exp(-nbar);
      v[0] = -std::expm1(-nbar);
      double pw = 1.0;
      for (int j = 1; j <= kMaxPartitionOrder; ++j) {
        pw *= nbar;
        v[static_cast<std::size_t>(j)] = pw * e;
      }
      return v;
    };
    auto res = quad::integrate_disk(f, params_.pop_radius, opt_.spec,
                                    channel::field_hints(xn, params_.pop_radius, params_.rx_radius));
    LaplaceMoments lm;
    lm.self_term = self_;
    lm.field_loss = reduced_ * res.value[0];
    for (int j = 1; j <= kMaxPartitionOrder; ++j)
      lm.j_moments[static_cast<std::size_t>(j)] = reduced_ * res.value[static_cast<std::size_t>(j)];
    return lm;
  }

  /// E exp(-s M) for the conditional mean M at location x.
  double laplace_transform(double s, Point2 x) const {
    if (!(s >= 0.0)) throw Error(ErrorKind::DomainError, "laplace_transform needs s >= 0");
    if (s == 0.0) return 1.0;
    const double xn = x.norm();
    const auto& tab = *table_;
    auto f = [&](double r, double phi) {
      return -std::expm1(-s * tab(std::sqrt(GeometryTerms::omega_of(xn, r, phi))));
    };
    auto res = quad::integrate_disk(f, params_.pop_radius, opt_.spec,
                                    channel::field_hints(xn, params_.pop_radius, params_.rx_radius));
    return std::exp(-s * self_ - reduced_ * res.value);
  }

  /// P(N >= eta) for eta = 1..eta_max from one set of field integrals.
  static std::vector<double> coop_prob_from_moments(const LaplaceMoments& lm, int eta_max) {
    if (eta_max < 1) throw Error(ErrorKind::DomainError, "eta_max must be >= 1");
    if (eta_max > kMaxPartitionOrder)
      throw Error(ErrorKind::CapExceeded, "threshold " + std::to_string(eta_max) + " exceeds partition cap");
    std::vector<double> g(kMaxPartitionOrder + 1, 0.0);
    for (int j = 1; j <= kMaxPartitionOrder; ++j) g[static_cast<std::size_t>(j)] = lm.j_moments[static_cast<std::size_t>(j)];
    g[1] += lm.self_term;
    const double l1 = lm.laplace_at_one();
    std::vector<double> out(static_cast<std::size_t>(eta_max));
    double cdf = 0.0;
    for (int eta = 1; eta <= eta_max; ++eta) {
      cdf += l1 * partition_sum(eta - 1, g);
      out[static_cast<std::size_t>(eta - 1)] = std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    return out;
  }

  std::vector<double> coop_prob_exact_all(Point2 x, int eta_max) const {
    return coop_prob_from_moments(moments(x), eta_max);
  }

  double coop_prob_exact(Point2 x) const { return coop_prob_exact_all(x, params_.eta()).back(); }

  /// N_self + E[aggregate from the other bacteria] at x.
  double mean_observation(Point2 x) const {
    const auto agg = channel::aggregate_response_density(x, params_, reduced_, opt_.approx_aggregate);
    return self_ + agg.mean_count;
  }

  static std::vector<double> poisson_tail_all(double mean, int eta_max) {
    std::vector<double> out(static_cast<std::size_t>(eta_max));
    for (int eta = 1; eta <= eta_max; ++eta)
      out[static_cast<std::size_t>(eta - 1)] = 1.0 - specfun::reg_gamma_q(eta, mean);
    return out;
  }

  std::vector<double> coop_prob_approx_all(Point2 x, int eta_max) const {
    return poisson_tail_all(mean_observation(x), eta_max);
  }

  double coop_prob_approx(Point2 x) const { return coop_prob_approx_all(x, params_.eta()).back(); }

 private:
  EnvParams params_;
  CoopOptions opt_;
  double reduced_ = 0.0;
  double self_ = 0.0;
  std::shared_ptr<const channel::PointwiseResponseTable> table_;
};

inline double laplace_transform(double s, Point2 x, const EnvParams& p, CoopOptions opt = {}) {
  return CooperationModel(p, opt).laplace_transform(s, x);
}

inline double coop_prob_exact(Point2 x, const EnvParams& p, CoopOptions opt = {}) {
  return CooperationModel(p, opt).coop_prob_exact(x);
}

inline double coop_prob_approx(Point2 x, const EnvParams& p, CoopOptions opt = {}) {
  const EnvParams v = validate(p, Analysis::Cooperation);
  const double self = channel::continuous_self_response(v).mean_count;
  const double agg = channel::aggregate_response_density(x, v, reduced_density(v), opt.approx_aggregate).mean_count;
  return 1.0 - specfun::reg_gamma_q(v.eta(), self + agg);
}

}  // namespace qsmc::coop
