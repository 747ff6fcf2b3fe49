#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "occlab/interlacement.hpp"

using namespace occlab;

namespace {

const Domain kUnit = Domain::ball(Point{0, 0, 0}, 1.0);

InterlacementOptions light() {
  InterlacementOptions o;
  o.steps = StepPolicy{dt_for_scale(1.0), 0.3, 1e6};
  return o;
}

}  // namespace

TEST(Interlacement, BallEntranceLaw) {
  auto law = EntranceLaw::ball(kUnit);
  EXPECT_NEAR(law.capacity(), 2.0 * std::numbers::pi, 1e-12);
  Rng rng(SeedSpec{5, 0});
  for (int i = 0; i < 100; ++i) {
    auto x = law.draw(rng);
    EXPECT_NEAR(std::hypot(x[0], x[1], x[2]), 1.0, 1e-12);
  }
}

TEST(Interlacement, ResolveDefaults) {
  Domain K = Domain::ball(Point{0, 0, 0}, 2.0);
  auto o = resolve_options(K, InterlacementOptions{});
  EXPECT_DOUBLE_EQ(o.steps.dt, dt_for_scale(2.0));
  EXPECT_DOUBLE_EQ(o.r_max, 100.0);
  InterlacementOptions given;
  given.steps.dt = 1e-3;
  given.r_max = 7.0;
  given.stride = 0;
  auto g = resolve_options(K, given);
  EXPECT_EQ(g.steps.dt, 1e-3);
  EXPECT_EQ(g.r_max, 7.0);
  EXPECT_EQ(g.stride, 1u);
}

TEST(Interlacement, FixedNMeanOccupation) {
  // A path entering the unit ball in d = 3 spends 2/3 there on average.
  auto law = EntranceLaw::ball(kUnit);
  auto o = light();
  o.mass_only = true;
  const std::size_t n = 3000;
  auto s = sample_fixed_n(law, n, o, SeedSpec{21, 0});
  EXPECT_EQ(s.n_paths, n);
  EXPECT_TRUE(s.occupation.empty());
  EXPECT_NEAR(s.mass / n, 2.0 / 3.0, 0.06);
  EXPECT_GT(s.truncation.neglected_mass_bound, 0.0);
  EXPECT_LT(s.truncation.neglected_mass_bound, 0.05 * s.mass);
}

TEST(Interlacement, PoissonPathCount) {
  auto law = EntranceLaw::ball(kUnit);
  auto o = light();
  o.mass_only = true;
  const double u = 0.3;
  double sum = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r)
    sum += static_cast<double>(sample_interlacement(law, u, o, SeedSpec{22, 0}.child(r)).n_paths);
  double lam = u * law.capacity();
  EXPECT_NEAR(sum / reps, lam, 4.0 * std::sqrt(lam / reps));
}

TEST(Interlacement, AtomsMatchMassAndStayInside) {
  auto law = EntranceLaw::ball(kUnit);
  auto o = light();
  auto s = sample_fixed_n(law, 20, o, SeedSpec{23, 0});
  EXPECT_NEAR(s.occupation.total_mass(), s.mass, 1e-9 * s.mass);
  for (std::size_t i = 0; i < s.occupation.size(); ++i)
    EXPECT_TRUE(kUnit.contains(s.occupation.position(i)));

  o.stride = 8;
  auto t = sample_fixed_n(law, 20, o, SeedSpec{23, 0});
  EXPECT_LT(t.occupation.size(), s.occupation.size());
  EXPECT_NEAR(t.mass, s.mass, 1e-9 * s.mass);
}

TEST(Interlacement, Reproducible) {
  auto law = EntranceLaw::ball(kUnit);
  auto a = sample_interlacement(law, 1.0, light(), SeedSpec{99, 4});
  auto b = sample_interlacement(law, 1.0, light(), SeedSpec{99, 4});
  EXPECT_EQ(a.n_paths, b.n_paths);
  EXPECT_EQ(a.occupation.positions(), b.occupation.positions());
  EXPECT_EQ(a.occupation.masses(), b.occupation.masses());
  auto c = sample_interlacement(law, 1.0, light(), SeedSpec{99, 5});
  EXPECT_NE(a.occupation.positions(), c.occupation.positions());
}

TEST(Interlacement, RejectsNonPositiveIntensity) {
  EXPECT_THROW(sample_interlacement(EntranceLaw::ball(kUnit), 0.0, light(), SeedSpec{1, 0}),
               std::invalid_argument);
}

TEST(Interlacement, PlaneRotation) {
  std::vector<double> a{1, 2, 2}, b{3, 0, 0};
  PlaneRotation R(a, b);
  std::vector<double> out(3);
  R.apply(a, out);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[i], b[i], 1e-12);
  // Orthogonal: preserves inner products.
  std::vector<double> x{0.3, -1, 2}, y{1, 1, -0.5}, rx(3), ry(3);
  R.apply(x, rx);
  R.apply(y, ry);
  double dot = 0, rdot = 0;
  for (int i = 0; i < 3; ++i) dot += x[i] * y[i], rdot += rx[i] * ry[i];
  EXPECT_NEAR(dot, rdot, 1e-12);
  // Vectors orthogonal to the plane are fixed.
  std::vector<double> n{0, 1, -1}, rn(3);
  R.apply(n, rn);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(rn[i], n[i], 1e-12);

  std::vector<double> c{0, 0, 3}, mc{0, 0, -3};
  PlaneRotation flip(c, mc);
  flip.apply(c, out);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[i], mc[i], 1e-12);
  EXPECT_THROW(PlaneRotation(a, std::vector<double>{1, 0, 0}), std::invalid_argument);
}

TEST(Interlacement, MomentReportSlope) {
  // Synthetic series whose spread grows like diam^{1.5}.
  std::vector<MomentSeries> series;
  for (double D : {1.0, 2.0, 4.0, 8.0}) {
    MomentSeries s{D, {}};
    for (int i = 0; i < 200; ++i) s.samples.push_back(std::pow(D, 1.5) * ((i % 2) ? 1.0 : -1.0));
    series.push_back(s);
  }
  auto rep = occupation_moment_report(series, 2.0);
  EXPECT_NEAR(rep.fit.slope, 1.5, 1e-9);
  ASSERT_EQ(rep.moments.size(), 4u);
}
