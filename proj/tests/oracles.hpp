#pragma once
// Reference computations that share no code with the library: integral
// representations, brute-force sums and closed forms derived separately.

#include <cmath>
#include <numbers>
#include <vector>

#include "qsmc/core.hpp"

namespace oracle {

// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt, trapezoid rule (the
// integrand is smooth and decays double-exponentially, so the rule converges
// geometrically). Returns exp(z) K_nu(z).
inline double bessel_k_scaled(int nu, double z) {
  const double h = 1.0 / 64.0;
  long double sum = 0.0L;
  for (int i = 0;; ++i) {
    const double t = i * h;
    const double e = std::exp(-z * (std::cosh(t) - 1.0)) * std::cosh(nu * t);
    sum += (i == 0 ? 0.5L : 1.0L) * e;
    if (t > 1.0 && e < 1e-300) break;
    if (t > 60.0) break;
  }
  return static_cast<double>(sum * h);
}

// I_nu(z) = (1/pi) int_0^pi exp(z cos t) cos(nu t) dt; periodic trapezoid rule.
// Returns exp(-z) I_nu(z).
inline double bessel_i_scaled(int nu, double z) {
  const int n = 4096;
  long double sum = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const double t = std::numbers::pi * i / n;
    const long double w = (i == 0 || i == n) ? 0.5L : 1.0L;
    sum += w * std::exp(z * (std::cos(t) - 1.0)) * std::cos(nu * t);
  }
  return static_cast<double>(sum / n);
}

// P(N < a) for N ~ Poisson(x), summed term by term in long double.
inline double poisson_cdf_below(int a, double x) {
  long double s = 0.0L;
  for (int n = 0; n < a; ++n) s += std::exp(static_cast<long double>(n) * std::log(static_cast<long double>(x)) - x -
                                            std::lgamma(static_cast<long double>(n) + 1.0L));
  return static_cast<double>(s);
}

// E[X^n] for X ~ Poisson(mean) by summing the PMF until the tail mass is
// below 1e-12 (and the terms have peaked).
inline double poisson_raw_moment(int n, double mean) {
  long double s = 0.0L, mass = 0.0L;
  long double pmf = std::exp(-static_cast<long double>(mean));
  for (int k = 0; k < 100000; ++k) {
    if (k > 0) pmf *= static_cast<long double>(mean) / k;
    s += pmf * std::pow(static_cast<long double>(k), n);
    mass += pmf;
    if (k > mean + 10 && 1.0L - mass < 1e-12L && pmf * std::pow(static_cast<long double>(k), n) < 1e-16L * s) break;
  }
  return static_cast<double>(s);
}

// Number of (m_1..m_n) with sum j m_j = n, counted by an odometer over every
// tuple with m_j <= n / j.
inline long brute_partition_count(int n) {
  if (n == 0) return 1;
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  long count = 0;
  while (true) {
    int s = 0;
    for (int j = 0; j < n; ++j) s += (j + 1) * m[static_cast<std::size_t>(j)];
    if (s == n) ++count;
    int j = 0;
    while (j < n) {
      if (++m[static_cast<std::size_t>(j)] <= n / (j + 1)) break;
      m[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == n) break;
  }
  return count;
}

// Steady-state count inside a receiver of radius R0 whose centre is at
// distance l from a continuous point source, from Graf's addition theorem
// applied to the K0 Green's function and integrated over the disk:
//   l >= R0: (q R0 / (D c)) I1(c R0) K0(c l)
//   l <  R0: (q / k) (1 - c R0 K1(c R0) I0(c l))
// with c = sqrt(k / D).
inline double pointwise_closed_form(double l, const qsmc::EnvParams& p) {
  const double c = std::sqrt(p.degradation / p.diffusion);
  const double R0 = p.rx_radius;
  const double q = p.emission_rate;
  if (l >= R0)
    return q * R0 / (p.diffusion * c) * std::cyl_bessel_i(1.0, c * R0) * std::cyl_bessel_k(0.0, c * l);
  return q / p.degradation * (1.0 - c * R0 * std::cyl_bessel_k(1.0, c * R0) * std::cyl_bessel_i(0.0, c * l));
}

// Probability that a 2D Gaussian of per-axis variance s2 centred at the
// origin lies in the disk of radius R0 centred at distance b: polar midpoint
// rule around the disk centre.
inline double gaussian_disk_mass(double b, double R0, double s2, int nr = 400, int nt = 400) {
  long double sum = 0.0L;
  for (int i = 0; i < nr; ++i) {
    const double r = R0 * (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = 2.0 * std::numbers::pi * (j + 0.5) / nt;
      const double x = b + r * std::cos(t);
      const double y = r * std::sin(t);
      sum += std::exp(-(x * x + y * y) / (2.0 * s2)) * r;
    }
  }
  return static_cast<double>(sum * (R0 / nr) * (2.0 * std::numbers::pi / nt) / (2.0 * std::numbers::pi * s2));
}

// P(N < eta) for a compound Poisson count N = sum_j j Y_j, Y_j ~ Poisson(mu_j)
// independent (mu indexed from 1), by the Panjer recursion
//   P(0) = exp(-sum mu),  n P(n) = sum_j j mu_j P(n - j).
inline double compound_poisson_cdf_below(int eta, const std::vector<double>& mu, double total_rate) {
  std::vector<long double> P(static_cast<std::size_t>(eta), 0.0L);
  P[0] = std::exp(-static_cast<long double>(total_rate));
  for (int n = 1; n < eta; ++n) {
    long double s = 0.0L;
    for (int j = 1; j <= n && j < static_cast<int>(mu.size()); ++j)
      s += j * static_cast<long double>(mu[static_cast<std::size_t>(j)]) * P[static_cast<std::size_t>(n - j)];
    P[static_cast<std::size_t>(n)] = s / n;
  }
  long double c = 0.0L;
  for (auto v : P) c += v;
  return static_cast<double>(c);
}

}  // namespace oracle
