#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "occlab/brownian.hpp"
#include "occlab/geometry.hpp"
#include "occlab/potential.hpp"
#include "occlab/stats.hpp"

namespace occlab {

// Capacity of K together with a sampler for its normalized equilibrium measure.
class EntranceLaw {
public:
  // Closed-form law of a Euclidean ball (uniform on the sphere).
  static EntranceLaw ball(const Domain& K);
  // Law recorded by sweeping from an enclosing ball.
  static EntranceLaw swept(const Domain& K, const SweepingResult& sweep);

  const Domain& domain() const { return K_; }
  double capacity() const { return capacity_; }
  std::vector<double> draw(Rng& rng) const;

private:
  EntranceLaw(Domain K, double cap) : K_(std::move(K)), capacity_(cap) {}
  Domain K_;
  double capacity_;
  std::optional<EntranceSampler> sampler_;
};

struct TruncationReport {
  double r_max = 0.0;
  // Expected occupation of K lost to paths returning after r_max.
  double neglected_mass_bound = 0.0;
};

struct InterlacementOptions {
  // dt <= 0 selects dt_for_scale(circumradius of K).
  StepPolicy steps{0.0, 0.3, 1e6};
  // <= 0 selects 50 x circumradius of K.
  double r_max = 0.0;
  std::size_t stride = 1;
  // Skip atom storage; only the total mass is tracked.
  bool mass_only = false;
};

struct InterlacementSample {
  Domain K;
  double u = 0.0;
  std::size_t n_paths = 0;
  WeightedAtoms occupation;
  double mass = 0.0;
  TruncationReport truncation;
};

InterlacementOptions resolve_options(const Domain& K, InterlacementOptions opt);

// Poisson(u Cap(K)) paths from the entrance law of K.
InterlacementSample sample_interlacement(const EntranceLaw& law, double u,
                                         const InterlacementOptions& opt, SeedSpec seed);
// Deterministic number of paths.
InterlacementSample sample_fixed_n(const EntranceLaw& law, std::size_t n,
                                   const InterlacementOptions& opt, SeedSpec seed);

struct LawComparison {
  double ks_statistic = 0.0;
  double p_value = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::vector<double> a;
  std::vector<double> b;
};

// Mass of dil_rho(I_u restricted to D_1) in D_rho versus
// rho^{-2} I_{u / rho^{d-2}}(D_rho).
LawComparison check_scaling_law(double u, double rho, int d, std::size_t replicas,
                                const InterlacementOptions& opt, SeedSpec seed);

struct TranslationCheck {
  std::vector<Point> centers;
  std::vector<std::vector<double>> masses;
  // Pairwise KS p-values in order (0,1), (0,2), ..., (1,2), ...
  std::vector<double> pairwise_p;
};

// Masses of I_u in D_r(x) for each center x, sampled on an enclosing ball
// around the origin.
TranslationCheck check_translation(double u, double r, const std::vector<Point>& centers,
                                   std::size_t replicas, const InterlacementOptions& opt,
                                   SeedSpec seed);

// Mass in D_inner of a sample on D_outer versus a direct sample on D_inner.
LawComparison check_restriction(double u, int d, double r_inner, double r_outer,
                                std::size_t replicas, const InterlacementOptions& opt,
                                SeedSpec seed);

struct MomentSeries {
  double diameter = 0.0;
  std::vector<double> samples;
};

struct MomentReport {
  std::vector<double> diameters;
  std::vector<double> moments;
  stats::LinearFit fit;
};

// Log-log fit of the central q-th moment^{1/q} of I_1(A) against diam(A).
MomentReport occupation_moment_report(const std::vector<MomentSeries>& series, double q);

// Rotation in the plane spanned by a and b taking a to b, as a composition
// of two reflections; identity when a == b.
class PlaneRotation {
public:
  PlaneRotation(std::span<const double> a, std::span<const double> b);
  void apply(std::span<const double> x, std::span<double> out) const;
  std::size_t dim() const { return v1_.size(); }

private:
  std::vector<double> v1_, v2_;
};

// Largest excess of |U B_t - B_t| over |B_0 - U B_0| along a path, over
// the positions with |B_t| <= 1.
double stability_violation(const PathSample& path, const PlaneRotation& rot);

}  // namespace occlab
