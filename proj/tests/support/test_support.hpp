#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gshape/constellation.hpp"

namespace gshape::testing {

/// Random constellation of the given order with distinct points.
inline Constellation random_constellation(std::size_t order, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  while (true) {
    std::vector<Complex> pts(order);
    for (auto& z : pts) z = {n(rng), n(rng)};
    Constellation c(std::move(pts));
    if (min_distance(c) > 1e-3 * scale) return c;
  }
}

inline Pmf random_pmf(std::size_t order, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(order);
  double sum = 0.0;
  for (auto& x : w) sum += (x = e(rng));
  for (auto& x : w) x /= sum;
  return Pmf(std::move(w));
}

/// Random relabeling: point permutation.
inline Constellation permute(const Constellation& c, std::mt19937_64& rng) {
  std::vector<Complex> pts(c.points().begin(), c.points().end());
  std::shuffle(pts.begin(), pts.end(), rng);
  return Constellation(std::move(pts));
}

/// Average-energy oracle for one axis of a square QAM: levels +-1, +-3, ...
inline double pam_moment(int levels, int power) {
  double s = 0.0;
  for (int l = 0; l < levels; ++l) s += std::pow(2.0 * l - (levels - 1), power);
  return s / levels;
}

/// Result of one property check run over many random cases.
struct PropertyOutcome {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

PropertyOutcome check_moments_scale_covariance(std::size_t cases, std::uint64_t seed);
PropertyOutcome check_moment_bounds(std::size_t cases, std::uint64_t seed);
PropertyOutcome check_mb_entropy_monotone(std::size_t cases, std::uint64_t seed);
PropertyOutcome check_normalize_idempotent(std::size_t cases, std::uint64_t seed);
PropertyOutcome check_file_round_trip(std::size_t cases, std::uint64_t seed);

}  // namespace gshape::testing
