#pragma once

#include <span>
#include <vector>

#include "gshape/constellation.hpp"
#include "gshape/rng.hpp"

namespace gshape {

/// Amplified link budget of one span type. Defaults: 80 km SSMF spans with 5 dB
/// noise-figure EDFAs, 20 GBd reference bandwidth.
struct LinkBudget {
  double span_length_km = 80.0;
  double attenuation_db_per_km = 0.2;
  int spans = 1;
  double noise_figure_db = 5.0;
  double center_frequency_hz = 193.41e12;
  double symbol_rate_hz = 20e9;

  /// Throws ConfigError unless every field is positive (attenuation may be zero).
  void validate() const;
};

/// Per-span nonlinear interference coefficients (1/mW^2). The interference
/// variance per span is P^3 (c0 + c1 (kappa - 2) + c2 (kappa3 - 6)).
struct NlinCoeffs {
  double c0 = 2e-3;
  double c1 = -4e-4;
  double c2 = -2e-5;

  /// The bracketed per-span factor for the given moments.
  double effective(const Moments& m) const noexcept { return c0 + c1 * (m.kappa - 2.0) + c2 * (m.kappa3 - 6.0); }
};

/// Everything the surrogate channel needs besides the transmitted moments.
struct ChannelParams {
  double ase_variance_per_span_mw = 0.0;
  NlinCoeffs nlin{};
  int spans = 1;
  double launch_power_mw = 1.0;

  /// Throws ConfigError on negative ASE, non-positive power/spans, non-finite or
  /// negative c0. A zero NLIN term (c0 = c1 = c2 = 0) is an ASE-only channel.
  void validate() const;

  /// ASE-only channel with the given SNR (dB) at unit launch power and one span.
  static ChannelParams ase_only(double snr_db);
};

double dbm_to_mw(double dbm) noexcept;
double mw_to_dbm(double mw) noexcept;

/// h f_c NF (G - 1) B per span, in mW.
double ase_variance_per_span(const LinkBudget& link);

/// Total complex noise variance (mW) after all spans.
/// Throws ConfigError if the result is not strictly positive.
double noise_variance(const ChannelParams& params, const Moments& m);

/// Exact partial derivatives of noise_variance with respect to kappa and kappa3.
struct NoiseVariancePartials {
  double d_kappa;
  double d_kappa3;
};
NoiseVariancePartials noise_variance_partials(const ChannelParams& params);

/// 10 log10(P / sigma^2).
double effective_snr_db(const ChannelParams& params, const Moments& m);

/// Launch power maximizing P / (A + B P^3) for the given moments,
/// (A / 2B)^(1/3) with A = spans*ase and B = spans*c_eff. Throws ConfigError if B <= 0.
double optimal_launch_power_mw(const ChannelParams& params, const Moments& m);

/// Fills `out` with circular complex Gaussian draws of unit total variance.
void draw_unit_noise(std::span<Complex> out, Rng& rng);

/// y = sqrt(P) x + n, n ~ CN(0, sigma2).
std::vector<Complex> sample(std::span<const Complex> x, double launch_power_mw, double sigma2, Rng& rng);

}  // namespace gshape
