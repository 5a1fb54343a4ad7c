#pragma once
// Spatial Poisson process of bacteria on a disk, temporal Poisson process of
// molecule releases, and the nth-neighbour distance density.
//
// Random streams: every draw comes from a std::mt19937_64 seeded with
// splitmix64(master, key...), so a realization or a bacterium's release
// sequence can be regenerated independently of how work is scheduled.
// Distributions come from Boost.Random, whose algorithms are fixed across
// platforms (the std:: distributions are implementation-defined).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "qsmc/core.hpp"

namespace qsmc::pp {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by (master, a, b).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return Engine(derive_seed(master, a, b));
}

inline double uniform01(Engine& rng) { return boost::random::uniform_01<double>()(rng); }

struct DiskPPP {
  std::vector<Point2> positions;
  double radius = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return positions.size(); }
};

/// Poisson(density * pi R^2) points, uniform on the disk of radius R.
inline std::vector<Point2> sample_disk_points(double density, double radius, Engine& rng) {
  if (!(density >= 0.0)) throw Error(ErrorKind::NonPositive, "density");
  const double mean = density * std::numbers::pi * radius * radius;
  std::vector<Point2> pts;
  if (mean <= 0.0) return pts;
  const auto n = boost::random::poisson_distribution<long, double>(mean)(rng);
  pts.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(uniform01(rng));
    const double a = 2.0 * std::numbers::pi * uniform01(rng);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return pts;
}

inline DiskPPP sample_disk_ppp(const EnvParams& p, std::uint64_t seed) {
  Engine rng(seed);
  return {sample_disk_points(p.density, p.pop_radius, rng), p.pop_radius, seed};
}

struct ReleaseSchedule {
  std::vector<double> times;
};

/// Release instants of a rate-q temporal Poisson process on [0, t_end],
/// built from exponential inter-arrival gaps.
inline ReleaseSchedule sample_release_times(double q, double t_end, Engine& rng) {
  if (!(q > 0.0)) throw Error(ErrorKind::NonPositive, "emission_rate");
  ReleaseSchedule s;
  if (!(t_end > 0.0)) return s;
  boost::random::exponential_distribution<double> gap(q);
  s.times.reserve(static_cast<std::size_t>(q * t_end * 1.2 + 16));
  double t = gap(rng);
  while (t <= t_end) {
    s.times.push_back(t);
    t += gap(rng);
  }
  return s;
}

inline ReleaseSchedule sample_release_times(double q, double t_end, std::uint64_t seed) {
  Engine rng(seed);
  return sample_release_times(q, t_end, rng);
}

/// Density of the distance to the nth nearest point of a planar Poisson
/// process of intensity lambda: 2 (lambda pi)^n r^(2n-1) exp(-lambda pi r^2) / Gamma(n).
inline double nn_distance_pdf(int n, double r, double lambda) {
  if (n < 1) throw Error(ErrorKind::DomainError, "nn_distance_pdf needs n >= 1");
  if (!(r >= 0.0)) throw Error(ErrorKind::DomainError, "nn_distance_pdf needs r >= 0");
  if (!(lambda > 0.0)) throw Error(ErrorKind::DomainError, "nn_distance_pdf needs lambda > 0");
  if (r == 0.0) return 0.0;
  const double lp = lambda * std::numbers::pi;
  const double log_v = std::log(2.0) + n * std::log(lp) + (2.0 * n - 1.0) * std::log(r) - lp * r * r - std::lgamma(n);
  return std::exp(log_v);
}

/// CSV with x_um, y_um columns.
inline void write_csv(std::ostream& os, const DiskPPP& ppp) {
  os << "x_um,y_um\n";
  for (const auto& p : ppp.positions) os << units::to_um(p.x) << ',' << units::to_um(p.y) << '\n';
}

}  // namespace qsmc::pp
