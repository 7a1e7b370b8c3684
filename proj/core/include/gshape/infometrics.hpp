#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gshape/channel.hpp"
#include "gshape/constellation.hpp"

namespace gshape {

/// Gaussian auxiliary channel used to compute decoding metrics.
struct AuxChannel {
  double sigma2 = 1.0;
  double launch_power = 1.0;
};

enum class Demapper { kLogSumExp, kMaxLog };

struct EstimatorOptions {
  /// Samples per independently seeded chunk. Results depend on this value but not
  /// on the number of worker threads.
  std::size_t chunk_size = 16384;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
  Demapper demapper = Demapper::kLogSumExp;
  /// Variance of the noise actually drawn; 0 means "same as the auxiliary channel".
  double true_sigma2 = 0.0;
};

struct McEstimate {
  double bits = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Per-bit LLRs log P(b_i = 1 | y) / P(b_i = 0 | y) under uniform priors.
void llrs(Complex y, const Constellation& c, const AuxChannel& aux, std::span<double> out,
          Demapper demapper = Demapper::kLogSumExp);
std::vector<double> llrs(Complex y, const Constellation& c, const AuxChannel& aux,
                         Demapper demapper = Demapper::kLogSumExp);

/// Monte-Carlo GMI of bit-metric decoding with uniform priors.
/// Transmitted words are stratified (sample k sends index k mod M).
McEstimate gmi_mc(const Constellation& c, const AuxChannel& aux, std::size_t n_samples,
                  std::uint64_t seed, const EstimatorOptions& opts = {});

/// Monte-Carlo MI with symbol-wise metrics, stratified over transmitted points and
/// weighted by the PMF. Points with zero probability are never sent.
McEstimate mi_mc(const Constellation& c, const Pmf& pmf, const AuxChannel& aux,
                 std::size_t n_samples, std::uint64_t seed, const EstimatorOptions& opts = {});

/// Gauss-Hermite product-rule evaluation of the same MI integral. Deterministic.
/// Refuses orders above 64.
double mi_quadrature_oracle(const Constellation& c, const Pmf& pmf, const AuxChannel& aux,
                            int nodes_per_axis = 64);

/// Nodes and weights for integrals of exp(-t^2) f(t), computed by Golub-Welsch.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

struct MetricsReport {
  int m = 0;
  double mi_bits = 0.0;
  double gmi_bits = 0.0;
  double mc_std_error_bits = 0.0;  ///< larger of the MI and GMI standard errors
  std::size_t samples = 0;
  double gray_penalty = 0.0;
  std::optional<double> loss_rate_bits;
  std::uint64_t seed = 0;
};

/// MI, GMI and Gray penalty of a uniform constellation over the surrogate channel.
/// `aux_variance_scale` != 1 evaluates a mismatched auxiliary channel.
MetricsReport evaluate(const Constellation& c, const ChannelParams& channel, std::size_t n_samples,
                       std::uint64_t seed, const EstimatorOptions& opts = {},
                       double aux_variance_scale = 1.0);

inline constexpr const char* kMetricsCsvHeader = "m,mi_bits,gmi_bits,stderr_bits,gray_penalty,samples,seed";
std::string to_csv_row(const MetricsReport& r);

}  // namespace gshape
