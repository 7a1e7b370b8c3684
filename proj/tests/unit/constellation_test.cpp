#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gshape/constellation.hpp"
#include "gshape/error.hpp"
#include "test_support.hpp"

namespace gshape {
namespace {

Constellation qpsk(double amplitude) {
  return Constellation({{amplitude, amplitude}, {amplitude, -amplitude}, {-amplitude, amplitude}, {-amplitude, -amplitude}});
}

TEST(BitWord, MsbFirstAndBijective) {
  const BitWord w(0b1011, 4);
  EXPECT_EQ(w[0], 1);
  EXPECT_EQ(w[1], 0);
  EXPECT_EQ(w[3], 1);
  EXPECT_EQ(w.to_string(), "1011");
  for (std::size_t i = 0; i < 64; ++i) {
    const BitWord a(i, 6);
    EXPECT_EQ(BitWord::from_bits(a.bits()), a);
  }
  EXPECT_THROW(BitWord(16, 4), Error);
}

TEST(Constellation, RejectsBadOrders) {
  EXPECT_THROW(Constellation(std::vector<Complex>(3, Complex{1.0, 0.0})), UnsupportedOrderError);
  EXPECT_THROW(Constellation(std::vector<Complex>(1, Complex{1.0, 0.0})), UnsupportedOrderError);
  EXPECT_THROW(Constellation({{1.0, 0.0}, {NAN, 0.0}}), DegenerateInputError);
}

TEST(Constellation, ValidateRejectsNearCoincidentPoints) {
  EXPECT_NO_THROW(validate(qpsk(1.0)));
  const Constellation dup({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
  EXPECT_THROW(validate(dup), DegenerateInputError);
  const Constellation close({{1.0, 0.0}, {1.0 + 1e-8, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
  EXPECT_THROW(validate(close), DegenerateInputError);
}

TEST(NormalizePower, Examples) {
  const auto unit = qpsk(1.0 / std::sqrt(2.0));
  const auto n1 = normalize_power(unit);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(n1[i] - unit[i]), 0.0, 1e-15);

  const auto n2 = normalize_power(qpsk(1.0));
  EXPECT_NEAR(n2[0].real(), 1.0 / std::sqrt(2.0), 1e-15);

  std::vector<Complex> grid;
  for (double re : {-3.0, -1.0, 1.0, 3.0}) {
    for (double im : {-3.0, -1.0, 1.0, 3.0}) grid.emplace_back(re, im);
  }
  const Constellation g(grid);
  const auto n3 = normalize_power(g);
  // Mean energy of the {+-1, +-3}^2 grid is 10.
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(std::abs(n3[i] - g[i] / std::sqrt(10.0)), 0.0, 1e-15);
  EXPECT_NEAR(moments(n3).mu2, 1.0, 1e-12);

  EXPECT_THROW(normalize_power(Constellation(std::vector<Complex>(4))), DegenerateInputError);
}

TEST(Moments, QpskIsConstantModulus) {
  const auto m = moments(qpsk(1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(m.mu2, 1.0, 1e-15);
  EXPECT_NEAR(m.kappa, 1.0, 1e-15);
  EXPECT_NEAR(m.kappa3, 1.0, 1e-15);
}

TEST(Moments, SixteenQamMatchesEnergyEnumeration) {
  // Unit-power 16QAM energies: 4 x 0.2, 8 x 1.0, 4 x 1.8.
  const double e4 = (4 * 0.04 + 8 * 1.0 + 4 * 3.24) / 16.0;
  const double e6 = (4 * 0.008 + 8 * 1.0 + 4 * 5.832) / 16.0;
  const auto m = moments(square_qam(16));
  EXPECT_NEAR(m.kappa, e4, 1e-12);
  EXPECT_NEAR(m.kappa3, e6, 1e-12);
  EXPECT_NEAR(m.kappa, 1.32, 1e-12);
  EXPECT_NEAR(m.kappa3, 1.96, 1e-12);
}

TEST(Moments, SquareQamMatchesPamOracle) {
  // |x|^2 = a^2 + b^2 with independent PAM axes.
  for (std::size_t order : {4u, 16u, 64u, 256u, 1024u}) {
    const int levels = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    const double a2 = testing::pam_moment(levels, 2), a4 = testing::pam_moment(levels, 4), a6 = testing::pam_moment(levels, 6);
    const double mu2 = 2 * a2;
    const double e4 = 2 * a4 + 2 * a2 * a2;
    const double e6 = 2 * a6 + 6 * a4 * a2;
    const auto m = moments(square_qam(order));
    EXPECT_NEAR(m.kappa, e4 / (mu2 * mu2), 1e-12) << order;
    EXPECT_NEAR(m.kappa3, e6 / (mu2 * mu2 * mu2), 1e-12) << order;
  }
  EXPECT_NEAR(moments(square_qam(256)).kappa, 1.3953, 5e-5);
}

TEST(Moments, ScaleCovariant) {
  const auto c = square_qam(16);
  const auto m = moments(c);
  const auto m2 = moments(c.scaled(2.0));
  EXPECT_NEAR(m2.mu2, 4.0 * m.mu2, 1e-12);
  EXPECT_NEAR(m2.kappa, m.kappa, 1e-12);
  EXPECT_NEAR(m2.kappa3, m.kappa3, 1e-12);
  EXPECT_THROW(moments(Constellation(std::vector<Complex>(4))), DegenerateInputError);
}

TEST(SquareQam, GrayNeighboursDifferInOneBit) {
  const auto c = square_qam(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j && std::abs(std::abs(c[i] - c[j]) - std::sqrt(2.0)) < 1e-12) EXPECT_EQ(hamming_distance(i, j), 1);
    }
  }
  for (std::size_t order : {4u, 16u, 64u, 256u, 1024u}) {
    const auto q = square_qam(order);
    EXPECT_NEAR(moments(q).mu2, 1.0, 1e-12);
    EXPECT_EQ(gray_penalty(q), 1.0) << order;
  }
}

TEST(SquareQam, FirstHalfOfLabelIsInPhase) {
  const auto c = square_qam(16);
  // Indices sharing the two MSBs share the in-phase coordinate.
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      if ((i >> 2) == (j >> 2)) EXPECT_DOUBLE_EQ(c[i].real(), c[j].real());
      if ((i & 3) == (j & 3)) EXPECT_DOUBLE_EQ(c[i].imag(), c[j].imag());
    }
  }
}

TEST(SquareQam, UnsupportedOrders) {
  for (std::size_t order : {2u, 8u, 12u, 32u, 2048u}) EXPECT_THROW(square_qam(order), UnsupportedOrderError) << order;
}

TEST(GrayPenalty, AntiGrayQpskIsPenalized) {
  // Labels 00 and 11 adjacent on the I axis.
  const Constellation anti({{-1.0, -1.0}, {-1.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}});
  EXPECT_GT(gray_penalty(anti), 1.0);
  const Constellation dup({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
  EXPECT_THROW(gray_penalty(dup), DegenerateInputError);
}

TEST(GrayPenalty, TiesAreAveraged) {
  // Point 0 at the origin has three neighbours at distance 1 with labels 01, 10, 11.
  const Constellation c({{0.0, 0.0}, {1.0, 0.0}, {-0.5, std::sqrt(3.0) / 2.0}, {-0.5, -std::sqrt(3.0) / 2.0}});
  // Point 0: (1 + 1 + 2) / 3. Points 1..3: nearest is the origin only.
  const double expected = ((4.0 / 3.0) + 1.0 + 1.0 + 2.0) / 4.0;
  EXPECT_NEAR(gray_penalty(c), expected, 1e-12);
}

TEST(MaxwellBoltzmann, Examples) {
  const auto q = square_qam(16);
  EXPECT_TRUE(maxwell_boltzmann(q, 0.0).is_uniform());

  const auto sharp = maxwell_boltzmann(q, 200.0);
  double inner = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    if (std::norm(q[i]) < 0.3) {
      EXPECT_NEAR(sharp[i], 0.25, 1e-12);
      inner += sharp[i];
    }
  }
  EXPECT_NEAR(inner, 1.0, 1e-12);

  EXPECT_LT(maxwell_boltzmann(q, 0.1).entropy_bits(), 4.0);
  EXPECT_THROW(maxwell_boltzmann(q, -1.0), DegenerateInputError);
}

TEST(MaxwellBoltzmann, UsesGeometryAsGiven) {
  const auto q = square_qam(16);
  const auto p1 = maxwell_boltzmann(q, 0.5);
  const auto p2 = maxwell_boltzmann(q.scaled(2.0), 0.5 / 4.0);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(p1[i], p2[i], 1e-15);
}

TEST(Pmf, Invariants) {
  EXPECT_THROW(Pmf({0.5, 0.6}), DegenerateInputError);
  EXPECT_THROW(Pmf({1.5, -0.5}), DegenerateInputError);
  EXPECT_NO_THROW(Pmf({0.25, 0.75}));
  EXPECT_DOUBLE_EQ(Pmf::uniform(8).entropy_bits(), 3.0);
}

TEST(ConstellationFile, RoundTrip) {
  const auto q = square_qam(16);
  std::stringstream ss;
  format_constellation(ss, q, std::vector<std::string>{"test shape"});
  EXPECT_EQ(ss.str().substr(0, 15), "GSHAPE v1 M=16\n");
  const auto back = parse_constellation(ss);
  EXPECT_EQ(back, q);
}

TEST(ConstellationFile, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_constellation(in, "mem");
  };
  std::string fifteen = "GSHAPE v1 M=16\n";
  for (int i = 0; i < 15; ++i) fifteen += std::to_string(i) + " 0\n";
  try {
    parse(fifteen);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("15 points"), std::string::npos);
  }
  EXPECT_THROW(parse("GSHAPE v1 M=3\n0 0\n1 0\n2 0\n"), ParseError);
  EXPECT_THROW(parse("GSHAPE v2 M=2\n0 0\n1 0\n"), ParseError);
  EXPECT_THROW(parse("GSHAPE v1 M=2\n0 0\n1 x\n"), ParseError);
  EXPECT_THROW(parse("GSHAPE v1 M=2\n0 0\n# note\n1 0\n"), ParseError);
  try {
    parse("GSHAPE v1 M=2\n0 0\n1 0 7\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  // Duplicates parse fine and fail validation.
  const auto dup = parse("GSHAPE v1 M=2\n1 0\n1 0\n# trailing comment\n");
  EXPECT_THROW(validate(dup), DegenerateInputError);
}

}  // namespace
}  // namespace gshape
