#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "gshape/channel.hpp"
#include "gshape/constellation.hpp"
#include "gshape/infometrics.hpp"

namespace gshape {

struct MbResult {
  double nu = 0.0;
  Pmf pmf;
  Constellation shaped;  ///< unit power under pmf
  Moments moments{};
  McEstimate mi;
};

/// Applies a Maxwell-Boltzmann PMF with parameter nu and renormalizes the geometry.
MbResult shape_mb(const Constellation& c, double nu);

/// MI-maximizing Maxwell-Boltzmann parameter over the surrogate channel.
///
/// Every candidate is scored with the same seed. The grid maximum (ties within
/// 1e-9 bit go to the smaller nu) is refined by a golden-section search on the
/// bracketing grid interval and replaced only on strict improvement.
MbResult optimize_mb(const Constellation& c, const ChannelParams& channel, std::span<const double> nu_grid,
                     std::size_t n_samples, std::uint64_t seed, const EstimatorOptions& opts = {});

}  // namespace gshape
