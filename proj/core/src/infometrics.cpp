#include "gshape/infometrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gshape/error.hpp"
#include "gshape/rng.hpp"
#include "parallel.hpp"

namespace gshape {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Per-stratum sums, combined across chunks in chunk order.
struct StrataStats {
  std::vector<double> sum;
  std::vector<double> sumsq;
  std::vector<std::size_t> count;

  explicit StrataStats(std::size_t n) : sum(n, 0.0), sumsq(n, 0.0), count(n, 0) {}

  void add(std::size_t s, double v) {
    sum[s] += v;
    sumsq[s] += v * v;
    ++count[s];
  }

  void merge(const StrataStats& o) {
    for (std::size_t s = 0; s < sum.size(); ++s) {
      sum[s] += o.sum[s];
      sumsq[s] += o.sumsq[s];
      count[s] += o.count[s];
    }
  }
};

// Weighted stratified mean and its standard error.
McEstimate summarize(const StrataStats& st, std::span<const double> weights, std::size_t samples) {
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const double w = weights[s];
    if (w == 0.0 || st.count[s] == 0) continue;
    const double n = static_cast<double>(st.count[s]);
    const double m = st.sum[s] / n;
    mean += w * m;
    if (st.count[s] > 1) {
      const double v = std::max(0.0, (st.sumsq[s] - n * m * m) / (n - 1.0));
      var += w * w * v / n;
    }
  }
  return {mean, std::sqrt(var), samples};
}

// Runs `body(rng, k)` for every sample k in [0, n), chunked with per-chunk seeds.
template <class Body>
StrataStats run_chunked(std::size_t n, std::size_t strata, std::uint64_t seed, const EstimatorOptions& opts,
                        Body&& body) {
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<StrataStats> partial(chunks, StrataStats(strata));
  detail::parallel_for(chunks, opts.workers, [&](std::size_t ci) {
    Rng rng(derive_seed(seed, "mc-chunk", {ci}));
    const std::size_t begin = ci * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    body(rng, begin, end, partial[ci]);
  });
  StrataStats total(strata);
  for (const auto& p : partial) total.merge(p);
  return total;
}

void check_aux(const AuxChannel& aux) {
  if (!(aux.sigma2 > 0.0) || !std::isfinite(aux.sigma2)) throw ConfigError("auxiliary noise variance must be positive");
  if (!(aux.launch_power > 0.0) || !std::isfinite(aux.launch_power)) throw ConfigError("launch power must be positive");
}

void check_samples(std::size_t n) {
  if (n < 10000) throw ConfigError("Monte-Carlo estimators need at least 10^4 samples, got " + std::to_string(n));
}

// Per-bit LLRs from symbol log-metrics d_j = -|y - sqrt(P) x_j|^2 / sigma^2.
void llrs_from_metrics(std::span<const double> d, int m, Demapper demapper, std::span<double> scratch,
                       std::span<double> out) {
  const std::size_t order = d.size();
  if (demapper == Demapper::kMaxLog) {
    for (int b = 0; b < m; ++b) {
      const std::size_t mask = std::size_t{1} << (m - 1 - b);
      double best1 = kNegInf, best0 = kNegInf;
      for (std::size_t j = 0; j < order; ++j) {
        if (j & mask) {
          best1 = std::max(best1, d[j]);
        } else {
          best0 = std::max(best0, d[j]);
        }
      }
      out[b] = best1 - best0;
    }
    return;
  }
  const double dmax = *std::max_element(d.begin(), d.end());
  for (std::size_t j = 0; j < order; ++j) scratch[j] = std::exp(d[j] - dmax);
  for (int b = 0; b < m; ++b) {
    const std::size_t mask = std::size_t{1} << (m - 1 - b);
    double s1 = 0.0, s0 = 0.0;
    for (std::size_t j = 0; j < order; ++j) {
      if (j & mask) {
        s1 += scratch[j];
      } else {
        s0 += scratch[j];
      }
    }
    // One side underflowed: redo both halves with their own shifts.
    if (s1 == 0.0 || s0 == 0.0) {
      double m1 = kNegInf, m0 = kNegInf;
      for (std::size_t j = 0; j < order; ++j) {
        double& best = (j & mask) ? m1 : m0;
        best = std::max(best, d[j]);
      }
      double t1 = 0.0, t0 = 0.0;
      for (std::size_t j = 0; j < order; ++j) {
        if (j & mask) {
          t1 += std::exp(d[j] - m1);
        } else {
          t0 += std::exp(d[j] - m0);
        }
      }
      out[b] = (m1 + std::log(t1)) - (m0 + std::log(t0));
    } else {
      out[b] = std::log(s1) - std::log(s0);
    }
  }
}

void symbol_metrics(Complex y, std::span<const Complex> scaled_points, double inv_sigma2, std::span<double> d) {
  for (std::size_t j = 0; j < scaled_points.size(); ++j) d[j] = -std::norm(y - scaled_points[j]) * inv_sigma2;
}

std::vector<Complex> scaled_points(const Constellation& c, double launch_power) {
  std::vector<Complex> s(c.points().begin(), c.points().end());
  const double a = std::sqrt(launch_power);
  for (auto& z : s) z *= a;
  return s;
}

}  // namespace

void llrs(Complex y, const Constellation& c, const AuxChannel& aux, std::span<double> out, Demapper demapper) {
  check_aux(aux);
  const int m = c.bits_per_symbol();
  if (out.size() != static_cast<std::size_t>(m)) throw Error("llr output span must have m entries");
  const auto pts = scaled_points(c, aux.launch_power);
  std::vector<double> d(c.order()), scratch(c.order());
  symbol_metrics(y, pts, 1.0 / aux.sigma2, d);
  llrs_from_metrics(d, m, demapper, scratch, out);
}

std::vector<double> llrs(Complex y, const Constellation& c, const AuxChannel& aux, Demapper demapper) {
  std::vector<double> out(c.bits_per_symbol());
  llrs(y, c, aux, out, demapper);
  return out;
}

McEstimate gmi_mc(const Constellation& c, const AuxChannel& aux, std::size_t n_samples, std::uint64_t seed,
                  const EstimatorOptions& opts) {
  check_aux(aux);
  check_samples(n_samples);
  const std::size_t order = c.order();
  const int m = c.bits_per_symbol();
  const auto pts = scaled_points(c, aux.launch_power);
  const double true_sigma2 = opts.true_sigma2 > 0.0 ? opts.true_sigma2 : aux.sigma2;
  const double noise_sd = std::sqrt(true_sigma2);
  const double inv_sigma2 = 1.0 / aux.sigma2;

  auto stats = run_chunked(n_samples, order, seed, opts, [&](Rng& rng, std::size_t begin, std::size_t end, StrataStats& st) {
    std::vector<double> d(order), scratch(order), llr(m);
    std::vector<Complex> noise(end - begin);
    draw_unit_noise(noise, rng);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t sent = k % order;
      const Complex y = pts[sent] + noise_sd * noise[k - begin];
      symbol_metrics(y, pts, inv_sigma2, d);
      llrs_from_metrics(d, m, opts.demapper, scratch, llr);
      double loss = 0.0;
      for (int b = 0; b < m; ++b) {
        const double sign = ((sent >> (m - 1 - b)) & 1U) ? 1.0 : -1.0;
        loss += softplus(-sign * llr[b]);
      }
      st.add(sent, static_cast<double>(m) - loss / kLn2);
    }
  });
  const std::vector<double> weights(order, 1.0 / static_cast<double>(order));
  return summarize(stats, weights, n_samples);
}

McEstimate mi_mc(const Constellation& c, const Pmf& pmf, const AuxChannel& aux, std::size_t n_samples,
                 std::uint64_t seed, const EstimatorOptions& opts) {
  check_aux(aux);
  check_samples(n_samples);
  if (pmf.size() != c.order()) throw DegenerateInputError("pmf size does not match constellation order");
  const std::size_t order = c.order();
  const auto pts = scaled_points(c, aux.launch_power);
  const double true_sigma2 = opts.true_sigma2 > 0.0 ? opts.true_sigma2 : aux.sigma2;
  const double noise_sd = std::sqrt(true_sigma2);
  const double inv_sigma2 = 1.0 / aux.sigma2;

  std::vector<std::size_t> active;
  std::vector<double> log_prior(order, kNegInf);
  for (std::size_t i = 0; i < order; ++i) {
    if (pmf[i] > 0.0) {
      active.push_back(i);
      log_prior[i] = std::log(pmf[i]);
    }
  }

  auto stats = run_chunked(n_samples, order, seed, opts, [&](Rng& rng, std::size_t begin, std::size_t end, StrataStats& st) {
    std::vector<double> d(order);
    std::vector<Complex> noise(end - begin);
    draw_unit_noise(noise, rng);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t sent = active[k % active.size()];
      const Complex y = pts[sent] + noise_sd * noise[k - begin];
      symbol_metrics(y, pts, inv_sigma2, d);
      double dmax = kNegInf;
      for (std::size_t j : active) dmax = std::max(dmax, log_prior[j] + d[j]);
      double s = 0.0;
      for (std::size_t j : active) s += std::exp(log_prior[j] + d[j] - dmax);
      st.add(sent, (d[sent] - (dmax + std::log(s))) / kLn2);
    }
  });
  return summarize(stats, pmf.probs(), n_samples);
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw Error("Gauss-Hermite rule needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = sqrt_pi * v0 * v0;
  }
  return rule;
}

double mi_quadrature_oracle(const Constellation& c, const Pmf& pmf, const AuxChannel& aux, int nodes_per_axis) {
  check_aux(aux);
  if (c.order() > 64) {
    throw UnsupportedOrderError("quadrature oracle is limited to M <= 64 (got " + std::to_string(c.order()) +
                                "); use mi_mc for larger orders");
  }
  if (nodes_per_axis < 40) throw ConfigError("quadrature oracle needs at least 40 nodes per axis");
  if (pmf.size() != c.order()) throw DegenerateInputError("pmf size does not match constellation order");
  const auto rule = gauss_hermite(nodes_per_axis);
  const auto pts = scaled_points(c, aux.launch_power);
  const double sigma = std::sqrt(aux.sigma2);
  const double inv_sigma2 = 1.0 / aux.sigma2;
  const std::size_t order = c.order();

  double total = 0.0;
  for (std::size_t i = 0; i < order; ++i) {
    if (pmf[i] == 0.0) continue;
    double acc = 0.0;
    for (int a = 0; a < nodes_per_axis; ++a) {
      for (int b = 0; b < nodes_per_axis; ++b) {
        const Complex n{sigma * rule.nodes[a], sigma * rule.nodes[b]};
        const Complex y = pts[i] + n;
        const double own = -std::norm(n) * inv_sigma2;
        double dmax = kNegInf;
        for (std::size_t j = 0; j < order; ++j) {
          if (pmf[j] > 0.0) dmax = std::max(dmax, std::log(pmf[j]) - std::norm(y - pts[j]) * inv_sigma2);
        }
        double s = 0.0;
        for (std::size_t j = 0; j < order; ++j) {
          if (pmf[j] > 0.0) s += std::exp(std::log(pmf[j]) - std::norm(y - pts[j]) * inv_sigma2 - dmax);
        }
        acc += rule.weights[a] * rule.weights[b] * (own - dmax - std::log(s));
      }
    }
    total += pmf[i] * acc / std::numbers::pi;
  }
  return total / kLn2;
}

MetricsReport evaluate(const Constellation& c, const ChannelParams& channel, std::size_t n_samples, std::uint64_t seed,
                       const EstimatorOptions& opts, double aux_variance_scale) {
  if (!(aux_variance_scale > 0.0)) throw ConfigError("auxiliary variance scale must be positive");
  const Constellation unit = normalize_power(c);
  const double sigma2 = noise_variance(channel, moments(unit));
  EstimatorOptions o = opts;
  o.true_sigma2 = sigma2;
  const AuxChannel aux{sigma2 * aux_variance_scale, channel.launch_power_mw};
  const auto mi = mi_mc(unit, Pmf::uniform(unit.order()), aux, n_samples, seed, o);
  const auto gmi = gmi_mc(unit, aux, n_samples, seed, o);
  if (!std::isfinite(mi.bits) || !std::isfinite(gmi.bits)) throw NumericalError("non-finite information estimate");
  MetricsReport r;
  r.m = unit.bits_per_symbol();
  r.mi_bits = mi.bits;
  r.gmi_bits = gmi.bits;
  r.mc_std_error_bits = std::max(mi.std_error, gmi.std_error);
  r.samples = n_samples;
  r.gray_penalty = gray_penalty(unit);
  r.seed = seed;
  return r;
}

std::string to_csv_row(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%zu,%llu", r.m, r.mi_bits, r.gmi_bits,
                r.mc_std_error_bits, r.gray_penalty, r.samples, static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace gshape
