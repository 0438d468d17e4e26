#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.h"
#include "psgdct/error.h"
#include "psgdct/spectral.h"

namespace psgdct {
namespace {

using spectral::DctBasis;

RealMatrix random_matrix(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix m(h, w);
  for (double& v : m.values()) v = n(rng);
  return m;
}

TEST(Dct1d, ConstantMapsToDc) {
  const RealVector out = spectral::dct_forward_1d(RealVector{1, 1, 1, 1});
  EXPECT_NEAR(out[0], 2.0, 1e-15);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(out[k], 0.0, 1e-15);
}

TEST(Dct1d, ImpulseMatchesReference) {
  const RealVector out = spectral::dct_forward_1d(RealVector{1, 0, 0, 0});
  const double expected[] = {0.5, 0.6533, 0.5, 0.2706};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out[k], expected[k], 5e-5);
  const std::vector<double> ref = oracle::dct({1, 0, 0, 0});
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out[k], ref[k], 1e-14);
}

TEST(Dct1d, InverseOfDcIsConstant) {
  const RealVector out = spectral::dct_inverse_1d(RealVector{2, 0, 0, 0});
  for (double v : out) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Dct1d, InverseOfUnitIsSecondBasisVector) {
  const RealVector out = spectral::dct_inverse_1d(RealVector{0, 1, 0, 0});
  const std::vector<double> ref = oracle::idct({0, 1, 0, 0});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out[i], ref[i], 1e-14);
  EXPECT_NEAR(out[0], std::sqrt(0.5) * std::cos(std::numbers::pi / 8.0), 1e-14);
}

TEST(Dct1d, BasisIsOrthogonalUpTo64) {
  for (std::size_t n = 1; n <= 64; ++n) {
    const DctBasis c(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += c(k, i) * c(k, j);
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
    EXPECT_LT(worst, 1e-10) << "n=" << n;
  }
}

TEST(Dct1d, RoundTripParsevalAndLinearity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t n : {1, 2, 3, 7, 16, 33, 64}) {
    RealVector x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    const RealVector fx = spectral::dct_forward_1d(x);
    const RealVector back = spectral::dct_inverse_1d(fx);
    double ex = 0.0, ef = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(back[i], x[i], 1e-10);
      ex += x[i] * x[i];
      ef += fx[i] * fx[i];
    }
    EXPECT_NEAR(ef, ex, 1e-9 * ex);

    RealVector mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = 2.5 * x[i] - 0.75 * y[i];
    const RealVector fm = spectral::dct_forward_1d(mix);
    const RealVector fy = spectral::dct_forward_1d(y);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(fm[k], 2.5 * fx[k] - 0.75 * fy[k], 1e-10);
  }
}

TEST(Dct1d, AgreesWithCosineSum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t n : {5, 12, 31}) {
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    const RealVector got = spectral::dct_forward_1d(x);
    const std::vector<double> ref = oracle::dct(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(got[k], ref[k], 1e-12);
  }
}

TEST(Dct1d, RejectsBadInput) {
  EXPECT_THROW(spectral::dct_forward_1d(RealVector{}), InvalidInput);
  EXPECT_THROW(spectral::dct_forward_1d(RealVector{1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
  EXPECT_THROW(spectral::dct_inverse_1d(RealVector{std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST(Dct2d, OnesAndImpulse) {
  const RealMatrix ones = RealMatrix::from_rows({{1, 1}, {1, 1}});
  const RealMatrix f = spectral::dct2d_forward(ones);
  EXPECT_NEAR(f(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(f(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(f(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(f(1, 1), 0.0, 1e-15);

  const RealMatrix imp = spectral::dct2d_forward(RealMatrix::from_rows({{1, 0}, {0, 0}}));
  for (double v : imp.values()) EXPECT_NEAR(v, 0.5, 1e-15);

  const RealMatrix back = spectral::dct2d_inverse(RealMatrix::from_rows({{2, 0}, {0, 0}}));
  for (double v : back.values()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Dct2d, MatchesDoubleSumAndIsSeparable) {
  std::mt19937_64 rng(11);
  const RealMatrix m = random_matrix(5, 7, rng);
  const RealMatrix f = spectral::dct2d_forward(m);
  const std::vector<double> ref = oracle::dct2({m.values().begin(), m.values().end()}, 5, 7);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(f.values()[i], ref[i], 1e-12);

  // Columns first, then rows, gives the same coefficients.
  RealMatrix cols_first(5, 7);
  for (std::size_t c = 0; c < 7; ++c) {
    std::vector<double> col(5);
    for (std::size_t r = 0; r < 5; ++r) col[r] = m(r, c);
    const RealVector t = spectral::dct_forward_1d(col);
    for (std::size_t r = 0; r < 5; ++r) cols_first(r, c) = t[r];
  }
  for (std::size_t r = 0; r < 5; ++r) {
    const RealVector t = spectral::dct_forward_1d(cols_first.row(r));
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(f(r, c), t[c], 1e-12);
  }

  const RealMatrix back = spectral::dct2d_inverse(f);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(back.values()[i], m.values()[i], 1e-10);
}

TEST(Dct2d, RejectsEmpty) {
  EXPECT_THROW(spectral::dct2d_forward(RealMatrix{}), InvalidInput);
  EXPECT_THROW(spectral::dct2d_inverse(RealMatrix{}), InvalidInput);
}

TEST(Threshold, SoftExamples) {
  EXPECT_EQ(spectral::soft_threshold(5.0, 2.0), 3.0);
  EXPECT_EQ(spectral::soft_threshold(-5.0, 2.0), -3.0);
  EXPECT_EQ(spectral::soft_threshold(1.5, 2.0), 0.0);
  EXPECT_THROW(spectral::soft_threshold(1.0, -0.1), InvalidParameter);
}

TEST(Threshold, HardExamples) {
  EXPECT_EQ(spectral::hard_threshold(5.0, 2.0), 5.0);
  EXPECT_EQ(spectral::hard_threshold(-1.0, 2.0), 0.0);
  EXPECT_EQ(spectral::hard_threshold(-3.0, 2.0), -3.0);
  EXPECT_EQ(spectral::hard_threshold(2.0, 2.0), 0.0);
  EXPECT_THROW(spectral::hard_threshold(1.0, -1.0), InvalidParameter);
}

TEST(Threshold, Properties) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> t(0.0, 4.0);
  for (int i = 0; i < 5000; ++i) {
    const double x = u(rng), y = u(rng), tau = t(rng);
    const double sx = spectral::soft_threshold(x, tau);
    EXPECT_EQ(spectral::soft_threshold(-x, tau), -sx);
    EXPECT_EQ(spectral::hard_threshold(-x, tau), -spectral::hard_threshold(x, tau));
    EXPECT_LE(std::abs(sx - spectral::soft_threshold(y, tau)), std::abs(x - y) + 1e-12);
    EXPECT_EQ(std::abs(sx), std::max(std::abs(x) - tau, 0.0));
    EXPECT_EQ(spectral::soft_threshold(x, 0.0), x);
    EXPECT_EQ(spectral::hard_threshold(x, 0.0), x == 0.0 ? 0.0 : x);
  }
}

TEST(Threshold, KeepsLargeNegativesUnlikeRelu) {
  std::vector<double> coeffs;
  for (int i = 1; i <= 50; ++i) coeffs.push_back(-0.5 * i);
  const RealVector soft = spectral::soft_threshold(coeffs, 1.0);
  const RealVector hard = spectral::hard_threshold(coeffs, 1.0);
  std::size_t relu_kept = 0, soft_kept = 0, hard_kept = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    relu_kept += std::max(coeffs[i], 0.0) != 0.0;
    soft_kept += soft[i] < 0.0;
    hard_kept += hard[i] < 0.0;
  }
  EXPECT_EQ(relu_kept, 0u);
  EXPECT_EQ(soft_kept, 48u);  // |x| > 1
  EXPECT_EQ(hard_kept, 48u);
}

TEST(Threshold, MatrixModes) {
  const RealMatrix m = RealMatrix::from_rows({{3, -0.5}, {-4, 1}});
  const RealMatrix s = spectral::threshold(m, 1.0, ThresholdMode::kSoft);
  EXPECT_EQ(s, RealMatrix::from_rows({{2, 0}, {-3, 0}}));
  const RealMatrix h = spectral::threshold(m, 1.0, ThresholdMode::kHard);
  EXPECT_EQ(h, RealMatrix::from_rows({{3, 0}, {-4, 0}}));
}

TEST(SpectralMultiply, Hadamard) {
  std::mt19937_64 rng(23);
  const RealMatrix x = random_matrix(2, 2, rng);
  const RealMatrix w = random_matrix(2, 2, rng);
  const RealMatrix y = spectral::spectral_multiply(x, w);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(y(r, c), x(r, c) * w(r, c));
  }
  EXPECT_EQ(spectral::spectral_multiply(x, RealMatrix(2, 2, 1.0)), x);
  EXPECT_EQ(spectral::spectral_multiply(x, RealMatrix(2, 2, 0.0)), RealMatrix(2, 2, 0.0));
  EXPECT_THROW(spectral::spectral_multiply(x, RealMatrix(2, 3, 1.0)), InvalidInput);
}

}  // namespace
}  // namespace psgdct
