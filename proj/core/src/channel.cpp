#include "gshape/channel.hpp"

#include <cmath>
#include <sstream>

#include "gshape/error.hpp"

namespace gshape {

namespace {

constexpr double kPlanck = 6.62607015e-34;  // J s

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void LinkBudget::validate() const {
  if (!positive(span_length_km)) throw ConfigError("span_length_km must be positive");
  if (!(attenuation_db_per_km >= 0.0) || !std::isfinite(attenuation_db_per_km)) {
    throw ConfigError("attenuation_db_per_km must be >= 0");
  }
  if (spans < 1) throw ConfigError("spans must be >= 1");
  if (!positive(noise_figure_db)) throw ConfigError("noise_figure_db must be positive");
  if (!positive(center_frequency_hz)) throw ConfigError("center_frequency_hz must be positive");
  if (!positive(symbol_rate_hz)) throw ConfigError("symbol_rate_hz must be positive");
}

void ChannelParams::validate() const {
  if (!(ase_variance_per_span_mw >= 0.0) || !std::isfinite(ase_variance_per_span_mw)) {
    throw ConfigError("ASE variance per span must be finite and >= 0");
  }
  if (!std::isfinite(nlin.c0) || nlin.c0 < 0.0) throw ConfigError("nlin_c0 must be finite and >= 0");
  if (!std::isfinite(nlin.c1) || !std::isfinite(nlin.c2)) throw ConfigError("nlin_c1 and nlin_c2 must be finite");
  if (spans < 1) throw ConfigError("spans must be >= 1");
  if (!positive(launch_power_mw)) throw ConfigError("launch power must be positive");
}

ChannelParams ChannelParams::ase_only(double snr_db) {
  ChannelParams p;
  p.ase_variance_per_span_mw = std::pow(10.0, -snr_db / 10.0);
  p.nlin = {0.0, 0.0, 0.0};
  p.spans = 1;
  p.launch_power_mw = 1.0;
  return p;
}

double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) noexcept { return 10.0 * std::log10(mw); }

double ase_variance_per_span(const LinkBudget& link) {
  link.validate();
  const double gain = std::pow(10.0, link.attenuation_db_per_km * link.span_length_km / 10.0);
  const double nf = std::pow(10.0, link.noise_figure_db / 10.0);
  const double watts = kPlanck * link.center_frequency_hz * nf * (gain - 1.0) * link.symbol_rate_hz;
  return watts * 1e3;
}

double noise_variance(const ChannelParams& params, const Moments& m) {
  params.validate();
  const double p = params.launch_power_mw;
  const double spans = static_cast<double>(params.spans);
  const double sigma2 = spans * params.ase_variance_per_span_mw + spans * p * p * p * params.nlin.effective(m);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    std::ostringstream os;
    os << "noise variance " << sigma2 << " is not positive; check the NLIN coefficients (kappa " << m.kappa
       << ", kappa3 " << m.kappa3 << ")";
    throw ConfigError(os.str());
  }
  return sigma2;
}

NoiseVariancePartials noise_variance_partials(const ChannelParams& params) {
  const double p = params.launch_power_mw;
  const double scale = static_cast<double>(params.spans) * p * p * p;
  return {scale * params.nlin.c1, scale * params.nlin.c2};
}

double effective_snr_db(const ChannelParams& params, const Moments& m) {
  return 10.0 * std::log10(params.launch_power_mw / noise_variance(params, m));
}

double optimal_launch_power_mw(const ChannelParams& params, const Moments& m) {
  params.validate();
  const double a = static_cast<double>(params.spans) * params.ase_variance_per_span_mw;
  const double b = static_cast<double>(params.spans) * params.nlin.effective(m);
  if (!(b > 0.0)) throw ConfigError("no finite optimal launch power without a positive nonlinear term");
  if (!(a > 0.0)) throw ConfigError("no positive optimal launch power without ASE noise");
  return std::cbrt(a / (2.0 * b));
}

void draw_unit_noise(std::span<Complex> out, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (auto& z : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = {re, im};
  }
}

std::vector<Complex> sample(std::span<const Complex> x, double launch_power_mw, double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) throw ConfigError("noise variance must be positive");
  std::vector<Complex> y(x.size());
  draw_unit_noise(y, rng);
  const double amp = std::sqrt(launch_power_mw);
  const double sd = std::sqrt(sigma2);
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = amp * x[k] + sd * y[k];
  return y;
}

}  // namespace gshape
