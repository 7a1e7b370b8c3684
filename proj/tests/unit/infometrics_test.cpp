#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gshape/error.hpp"
#include "gshape/infometrics.hpp"
#include "test_support.hpp"

namespace gshape {
namespace {

AuxChannel at_snr(double snr_db) { return {std::pow(10.0, -snr_db / 10.0), 1.0}; }

// I(X;Y) of BPSK +-a in real Gaussian noise of variance v, by trapezoidal integration.
double bpsk_mi_trapezoid(double a, double v) {
  const double sd = std::sqrt(v);
  const int n = 200000;
  const double lo = -14.0 * sd, hi = 14.0 * sd, h = (hi - lo) / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = lo + k * h;
    const double pdf = std::exp(-t * t / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
    const double y = a + t;
    const double f = std::log1p(std::exp(-2.0 * a * y / v)) / std::numbers::ln2;
    acc += (k == 0 || k == n ? 0.5 : 1.0) * pdf * f;
  }
  return 1.0 - acc * h;
}

TEST(GaussHermite, Moments) {
  const auto rule = gauss_hermite(64);
  double w = 0.0, t2 = 0.0, t4 = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    w += rule.weights[k];
    t2 += rule.weights[k] * rule.nodes[k] * rule.nodes[k];
    t4 += rule.weights[k] * std::pow(rule.nodes[k], 4);
  }
  const double sp = std::sqrt(std::numbers::pi);
  EXPECT_NEAR(w, sp, 1e-12);
  EXPECT_NEAR(t2, sp / 2, 1e-12);
  EXPECT_NEAR(t4, 3 * sp / 4, 1e-11);
}

TEST(Llrs, BpskAlgebra) {
  const Constellation bpsk({{-1.0, 0.0}, {1.0, 0.0}});  // bit 1 <-> +1
  const auto l = llrs({1.0, 0.0}, bpsk, {2.0, 1.0});
  ASSERT_EQ(l.size(), 1u);
  EXPECT_NEAR(l[0], 2.0, 1e-12);
  for (double re : {-2.0, -0.3, 0.7, 3.0}) EXPECT_NEAR(llrs({re, 0.4}, bpsk, {0.5, 1.0})[0], 4 * re / 0.5, 1e-9);
}

TEST(Llrs, SignBitsVanishAtOrigin) {
  for (std::size_t order : {4u, 16u, 64u}) {
    const auto q = square_qam(order);
    const auto l = llrs({0.0, 0.0}, q, {0.3, 1.0});
    const int half = q.bits_per_symbol() / 2;
    EXPECT_NEAR(l[0], 0.0, 1e-12);
    EXPECT_NEAR(l[half], 0.0, 1e-12);
  }
}

TEST(Llrs, GrayQpskSeparatesAxes) {
  const auto q = square_qam(4);
  const AuxChannel aux{0.5, 1.0};
  const double ref0 = llrs({0.3, -0.8}, q, aux)[0];
  const double ref1 = llrs({-0.6, 0.25}, q, aux)[1];
  for (double other : {-2.0, 0.0, 0.4, 1.5}) {
    EXPECT_NEAR(llrs({0.3, other}, q, aux)[0], ref0, 1e-12);
    EXPECT_NEAR(llrs({other, 0.25}, q, aux)[1], ref1, 1e-12);
  }
}

TEST(Llrs, ComplementingABitFlipsItsSign) {
  std::mt19937_64 rng(5);
  const auto c = normalize_power(testing::random_constellation(16, rng));
  const AuxChannel aux{0.2, 1.0};
  for (int bit = 0; bit < 4; ++bit) {
    const std::size_t mask = std::size_t{1} << (3 - bit);
    std::vector<Complex> swapped(16);
    for (std::size_t j = 0; j < 16; ++j) swapped[j] = c[j ^ mask];
    const Constellation d(swapped);
    const Complex y{0.37, -0.21};
    EXPECT_NEAR(llrs(y, d, aux)[bit], -llrs(y, c, aux)[bit], 1e-12);
  }
}

TEST(Llrs, MaxLogIsCloseAtHighSnr) {
  const auto q = square_qam(16);
  const AuxChannel aux{0.001, 1.0};
  const Complex y{0.31, -0.95};
  const auto exact = llrs(y, q, aux);
  const auto approx = llrs(y, q, aux, Demapper::kMaxLog);
  for (int b = 0; b < 4; ++b) EXPECT_NEAR(approx[b], exact[b], 1e-3 * std::abs(exact[b]) + 1e-9);
}

TEST(GmiMc, Limits) {
  const auto q = square_qam(4);
  const auto hi = gmi_mc(q, at_snr(30.0), 100000, 1);
  EXPECT_GT(hi.bits, 2.0 - 1e-3);
  const auto lo = gmi_mc(q, at_snr(-40.0), 100000, 1);
  EXPECT_NEAR(lo.bits, 0.0, 0.01);
  EXPECT_THROW(gmi_mc(q, at_snr(0.0), 100, 1), ConfigError);
}

TEST(GmiMc, GrayQpskEqualsMiOracle) {
  const auto q = square_qam(4);
  const auto aux = at_snr(0.0);
  const double oracle = mi_quadrature_oracle(q, Pmf::uniform(4), aux);
  const double trapezoid = 2.0 * bpsk_mi_trapezoid(1.0 / std::sqrt(2.0), aux.sigma2 / 2.0);
  EXPECT_NEAR(oracle, trapezoid, 1e-6);
  const auto gmi = gmi_mc(q, aux, 1000000, 3);
  EXPECT_NEAR(gmi.bits, oracle, 0.005);
}

TEST(MiMc, Limits) {
  const auto q = square_qam(4);
  EXPECT_NEAR(mi_mc(q, Pmf::uniform(4), at_snr(30.0), 100000, 1).bits, 2.0, 1e-3);
  const auto point_mass = mi_mc(square_qam(16), Pmf(std::vector<double>{0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),
                                at_snr(10.0), 20000, 1);
  EXPECT_EQ(point_mass.bits, 0.0);
}

TEST(MiMc, SixteenQamMatchesQuadrature) {
  const auto q = square_qam(16);
  const auto aux = at_snr(10.0);
  const double oracle = mi_quadrature_oracle(q, Pmf::uniform(16), aux);
  const auto mc = mi_mc(q, Pmf::uniform(16), aux, 1000000, 11);
  EXPECT_NEAR(mc.bits, oracle, 0.01);
  EXPECT_LE(std::abs(mc.bits - oracle), 3 * mc.std_error + 1e-3);
}

TEST(MiMc, NonUniformMatchesQuadrature) {
  const auto q = square_qam(16);
  const Pmf p = maxwell_boltzmann(q, 0.8);
  const auto shaped = normalize_power(q, p);
  const auto aux = at_snr(8.0);
  const double oracle = mi_quadrature_oracle(shaped, p, aux);
  const auto mc = mi_mc(shaped, p, aux, 400000, 4);
  EXPECT_LE(std::abs(mc.bits - oracle), std::max(0.01, 3 * mc.std_error));
}

TEST(Quadrature, QpskSelfConsistencyAcrossSnr) {
  const auto q = square_qam(4);
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
    const auto aux = at_snr(snr);
    const double oracle = mi_quadrature_oracle(q, Pmf::uniform(4), aux);
    const auto mc = mi_mc(q, Pmf::uniform(4), aux, 200000, 17);
    EXPECT_LE(std::abs(mc.bits - oracle), 3 * mc.std_error + 1e-6) << snr;
    EXPECT_NEAR(oracle, 2.0 * bpsk_mi_trapezoid(1.0 / std::sqrt(2.0), aux.sigma2 / 2.0), 1e-6) << snr;
  }
}

TEST(Quadrature, Bounds) {
  for (std::size_t order : {4u, 16u, 64u}) {
    for (double snr : {0.0, 10.0, 20.0, 30.0}) {
      const double mi = mi_quadrature_oracle(square_qam(order), Pmf::uniform(order), at_snr(snr));
      EXPECT_LE(mi, std::log2(static_cast<double>(order)) + 1e-9);
      EXPECT_LE(mi, std::log2(1.0 + std::pow(10.0, snr / 10.0)) + 0.01);
    }
  }
}

TEST(Quadrature, RefusesLargeOrders) {
  std::mt19937_64 rng(1);
  const auto c = testing::random_constellation(128, rng);
  EXPECT_THROW(mi_quadrature_oracle(c, Pmf::uniform(128), at_snr(10.0)), UnsupportedOrderError);
}

TEST(Quadrature, LabelPermutationInvariance) {
  std::mt19937_64 rng(8);
  const auto c = normalize_power(testing::random_constellation(16, rng));
  const auto perm = testing::permute(c, rng);
  const auto aux = at_snr(9.0);
  EXPECT_NEAR(mi_quadrature_oracle(c, Pmf::uniform(16), aux), mi_quadrature_oracle(perm, Pmf::uniform(16), aux), 1e-12);
  const auto a = mi_mc(c, Pmf::uniform(16), aux, 200000, 2);
  const auto b = mi_mc(perm, Pmf::uniform(16), aux, 200000, 2);
  EXPECT_LE(std::abs(a.bits - b.bits), 3 * std::hypot(a.std_error, b.std_error));
}

TEST(Evaluate, GrayQamGapIsSmallAtHighSnr) {
  const auto r = evaluate(square_qam(256), ChannelParams::ase_only(18.0), 300000, 5);
  EXPECT_EQ(r.m, 8);
  EXPECT_LE(r.mi_bits - r.gmi_bits, 0.1);
  EXPECT_LE(r.gmi_bits, r.mi_bits + 3 * r.mc_std_error_bits);
  EXPECT_EQ(r.gray_penalty, 1.0);
}

TEST(Evaluate, DeterministicAndWorkerIndependent) {
  const auto q = square_qam(64);
  const auto ch = ChannelParams::ase_only(12.0);
  EstimatorOptions one, many;
  one.workers = 1;
  many.workers = 4;
  const auto a = evaluate(q, ch, 100000, 21, one);
  const auto b = evaluate(q, ch, 100000, 21, many);
  const auto c = evaluate(q, ch, 100000, 21, one);
  EXPECT_EQ(to_csv_row(a), to_csv_row(b));
  EXPECT_EQ(to_csv_row(a), to_csv_row(c));
  EXPECT_NE(to_csv_row(a), to_csv_row(evaluate(q, ch, 100000, 22, one)));
}

TEST(Evaluate, MismatchedAuxiliaryChannelCostsRate) {
  const auto q = square_qam(16);
  const auto ch = ChannelParams::ase_only(10.0);
  const auto matched = evaluate(q, ch, 200000, 9);
  const auto mismatched = evaluate(q, ch, 200000, 9, {}, 4.0);
  EXPECT_LT(mismatched.gmi_bits, matched.gmi_bits);
  EXPECT_LT(mismatched.mi_bits, matched.mi_bits);
}

TEST(Evaluate, GrayBeatsAntiGrayOnGmiButNotMi) {
  const auto gray = square_qam(4);
  const Constellation anti({gray[0], gray[1], gray[3], gray[2]});
  const auto ch = ChannelParams::ase_only(3.0);
  const auto a = evaluate(gray, ch, 200000, 4);
  const auto b = evaluate(anti, ch, 200000, 4);
  EXPECT_GT(a.gmi_bits, b.gmi_bits + 0.02);
  EXPECT_LE(std::abs(a.mi_bits - b.mi_bits), 3 * std::hypot(a.mc_std_error_bits, b.mc_std_error_bits) + 1e-3);
}

TEST(Evaluate, CsvRow) {
  MetricsReport r;
  r.m = 4;
  r.mi_bits = 3.5;
  r.gmi_bits = 3.25;
  r.mc_std_error_bits = 0.001;
  r.gray_penalty = 1.0;
  r.samples = 1000;
  r.seed = 7;
  EXPECT_EQ(std::string(kMetricsCsvHeader), "m,mi_bits,gmi_bits,stderr_bits,gray_penalty,samples,seed");
  EXPECT_EQ(to_csv_row(r), "4,3.5,3.25,0.001,1,1000,7");
}

}  // namespace
}  // namespace gshape
