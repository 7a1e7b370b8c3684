#include "gshape/mb_shaping.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gshape/error.hpp"

namespace gshape {

namespace {

constexpr double kTieBits = 1e-9;
constexpr int kGoldenIterations = 12;

}  // namespace

MbResult shape_mb(const Constellation& c, double nu) {
  Pmf pmf = maxwell_boltzmann(c, nu);
  Constellation shaped = normalize_power(c, pmf);
  const Moments mom = moments(shaped, pmf);
  return MbResult{nu, std::move(pmf), std::move(shaped), mom, {}};
}

MbResult optimize_mb(const Constellation& c, const ChannelParams& channel, std::span<const double> nu_grid,
                     std::size_t n_samples, std::uint64_t seed, const EstimatorOptions& opts) {
  if (nu_grid.empty()) throw ConfigError("Maxwell-Boltzmann nu grid is empty");
  std::vector<double> grid(nu_grid.begin(), nu_grid.end());
  for (double nu : grid) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw ConfigError("Maxwell-Boltzmann nu values must be finite and >= 0");
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto score = [&](double nu) {
    MbResult r = shape_mb(c, nu);
    const double sigma2 = noise_variance(channel, r.moments);
    r.mi = mi_mc(r.shaped, r.pmf, AuxChannel{sigma2, channel.launch_power_mw}, n_samples, seed, opts);
    if (!std::isfinite(r.mi.bits)) throw NumericalError("non-finite MI while optimizing the shaping parameter");
    return r;
  };

  std::size_t best_index = 0;
  MbResult best = score(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    MbResult r = score(grid[i]);
    if (r.mi.bits > best.mi.bits + kTieBits) {
      best = std::move(r);
      best_index = i;
    }
  }
  if (grid.size() < 2) return best;

  double lo = grid[best_index == 0 ? 0 : best_index - 1];
  double hi = grid[std::min(best_index + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  MbResult r1 = score(x1);
  MbResult r2 = score(x2);
  for (int it = 0; it < kGoldenIterations; ++it) {
    if (r1.mi.bits >= r2.mi.bits) {
      hi = x2;
      x2 = x1;
      r2 = std::move(r1);
      x1 = hi - inv_phi * (hi - lo);
      r1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      r1 = std::move(r2);
      x2 = lo + inv_phi * (hi - lo);
      r2 = score(x2);
    }
  }
  MbResult& refined = r1.mi.bits >= r2.mi.bits ? r1 : r2;
  if (refined.mi.bits > best.mi.bits + kTieBits) return std::move(refined);
  return best;
}

}  // namespace gshape
