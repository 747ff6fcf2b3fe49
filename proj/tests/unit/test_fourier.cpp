#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "occlab/fourier.hpp"

using namespace occlab;

TEST(Fourier, RadialClosedForms) {
  for (std::size_t d = 1; d <= 6; ++d) EXPECT_NEAR(ball_fourier_radial(0.0, d), 1.0, 1e-12);
  for (double k : {1e-4, 0.01, 0.5, 1.0, 3.7, 10.0, 55.0}) {
    EXPECT_NEAR(ball_fourier_radial(k, 1), std::sin(k) / k, 1e-10) << k;
    // The closed form cancels badly for small k; compare with its series there.
    double d3 = k < 1e-3 ? 1.0 - k * k / 10.0
                         : 3.0 * (std::sin(k) - k * std::cos(k)) / (k * k * k);
    EXPECT_NEAR(ball_fourier_radial(k, 3), d3, 1e-9) << k;
  }
  // Even in k.
  EXPECT_EQ(ball_fourier_radial(-2.0, 3), ball_fourier_radial(2.0, 3));
}

TEST(Fourier, IndicatorUsesTwoPiEll) {
  std::vector<double> xi{1.0, 2.0, 2.0};
  double ell = 0.1;
  EXPECT_NEAR(ball_indicator_fourier(xi, ell, 3),
              ball_fourier_radial(2.0 * std::numbers::pi * ell * 3.0, 3), 1e-15);
}

TEST(Fourier, DecayConstantBoundsTransform) {
  for (std::size_t d = 1; d <= 5; ++d) {
    double C = bessel_decay_constant(d);
    EXPECT_TRUE(std::isfinite(C));
    EXPECT_GE(C, 1.0);
    double worst = 0;
    for (double s = 0; s < 200; s += 0.003) {
      double v = std::abs(ball_fourier_radial(2.0 * std::numbers::pi * s, d));
      worst = std::max(worst, v * std::pow(1.0 + s, 0.5 * (d + 1)));
    }
    EXPECT_LE(worst, C) << d;
  }
}

TEST(Fourier, TableIndexing) {
  FourierTable t(3, 2);
  EXPECT_EQ(t.size(), 125u);
  for (std::size_t idx = 0; idx < t.size(); ++idx) EXPECT_EQ(t.index(t.frequency(idx)), idx);
  std::vector<int> zero{0, 0, 0}, last{0, 0, 1};
  EXPECT_EQ(t.index(last), t.index(zero) + 1);
  std::vector<int> out{3, 0, 0};
  EXPECT_THROW(t.index(out), std::out_of_range);
  EXPECT_THROW(FourierTable(2, 0), std::invalid_argument);
}

TEST(Fourier, SingleAtomCoefficients) {
  WeightedAtoms mu(1, Space::Torus);
  mu.add(std::vector<double>{0.25}, 2.0);
  auto t = fourier_coefficients(mu, 4);
  for (int k = -4; k <= 4; ++k) {
    std::vector<int> xi{k};
    auto expect = std::polar(2.0, -2.0 * std::numbers::pi * k * 0.25);
    EXPECT_NEAR(std::abs(t(xi) - expect), 0.0, 1e-12) << k;
  }
  WeightedAtoms eu(1);
  eu.add(std::vector<double>{0.0}, 1.0);
  EXPECT_THROW(fourier_coefficients(eu, 2), std::invalid_argument);
}

TEST(Fourier, UniformGridKillsLowModes) {
  // n equally spaced atoms on T^2: only multiples of n survive.
  const int n = 5;
  WeightedAtoms mu(2, Space::Torus);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mu.add(std::vector<double>{(i + 0.5) / n - 0.5, (j + 0.5) / n - 0.5}, 1.0 / (n * n));
  auto t = fourier_coefficients(mu, n - 1);
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    auto f = t.frequency(idx);
    double expect = (f[0] == 0 && f[1] == 0) ? 1.0 : 0.0;
    EXPECT_NEAR(std::abs(t.at(idx)), expect, 1e-12);
  }
  auto b = sobolev_upper_bound(t, 1.0, 2.0);
  EXPECT_NEAR(b.partial, 0.0, 1e-20);
}

TEST(Fourier, SmoothingMultipliesBySquare) {
  WeightedAtoms mu(2, Space::Torus);
  mu.add(std::vector<double>{0.1, -0.3}, 1.0);
  auto t = fourier_coefficients(mu, 3);
  auto s = smoothed_coefficients(t, 0.05);
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    auto f = t.frequency(idx);
    std::vector<double> xi{double(f[0]), double(f[1])};
    double m = ball_indicator_fourier(xi, 0.05, 2);
    EXPECT_NEAR(std::abs(s.at(idx) - t.at(idx) * m * m), 0.0, 1e-14);
  }
  EXPECT_THROW(smoothed_coefficients(t, 0.6), std::invalid_argument);
}

TEST(Fourier, SobolevBoundBracketsDirac) {
  // Dirac at 0 on T^1, q = 1: sum_{k != 0} (2 pi k)^{-2} = 1/12.
  WeightedAtoms mu(1, Space::Torus);
  mu.add(std::vector<double>{0.0}, 1.0);
  auto b = sobolev_upper_bound(mu, 1.0, 20);
  EXPECT_LT(b.partial, 1.0 / 12.0);
  EXPECT_GE(b.partial + b.tail, 1.0 / 12.0 - 1e-12);
  EXPECT_LT(b.partial + b.tail, 1.0 / 12.0 + 1e-3);
  EXPECT_NEAR(b.value, std::sqrt(b.partial), 1e-15);

  // 2q <= d: tail diverges.
  WeightedAtoms mu3(3, Space::Torus);
  mu3.add(std::vector<double>{0.0, 0.0, 0.0}, 1.0);
  auto c = sobolev_upper_bound(mu3, 1.0, 2);
  EXPECT_TRUE(std::isinf(c.tail));
}
