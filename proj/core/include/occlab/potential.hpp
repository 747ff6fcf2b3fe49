#pragma once

#include <cstddef>
#include <vector>

#include "occlab/brownian.hpp"
#include "occlab/geometry.hpp"
#include "occlab/rng.hpp"

namespace occlab {

// c(d) with g(x, y) = c(d) |x - y|^{2-d} the Green function of BM (generator Delta/2).
double green_constant(int d);

struct CapacityValue {
  enum class Method { ClosedForm, SweepingEstimate };
  double value = 0.0;
  Method method = Method::ClosedForm;
  // Sweeping estimates only.
  double ci_halfwidth = 0.0;
  std::size_t replicas = 0;
  // Bound on the bias from truncating at the escape radius.
  double truncation_bound = 0.0;
};

CapacityValue capacity_ball(int d, double r);

// Uniform point on the sphere of a Euclidean ball.
std::vector<double> sample_equilibrium_ball(const Domain& ball, Rng& rng);
Point sample_equilibrium_ball(const Domain& ball, SeedSpec seed);

// Hit points collected by sweeping; drawing uniformly from them approximates
// the normalized equilibrium measure of K.
class EntranceSampler {
public:
  EntranceSampler() = default;
  EntranceSampler(std::size_t dim, std::vector<double> points);
  std::size_t size() const { return dim_ ? points_.size() / dim_ : 0; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  std::span<const double> draw(Rng& rng) const;

private:
  std::size_t dim_ = 0;
  std::vector<double> points_;
};

struct SweepingResult {
  CapacityValue capacity;
  double hit_fraction = 0.0;
  EntranceSampler entrance;
};

struct SweepingOptions {
  std::size_t replicas = 100000;
  StepPolicy steps;
  // Escape radius as a multiple of the enclosing radius.
  double r_max_factor = 50.0;
  bool bridge_correction = true;
};

// Capacity of K from paths started uniformly on the sphere of an enclosing
// ball, recording whether they reach K before escaping.
SweepingResult estimate_capacity_sweeping(const Domain& K, const Domain& enclosing,
                                          const SweepingOptions& opt, SeedSpec seed);

struct HittingPrediction {
  double prediction = 0.0;
  double error_term = 0.0;
  // False outside the small-ball, moderate-time regime.
  bool regime_ok = true;
};

HittingPrediction torus_hitting_prediction(double ell, double rho, double sigma, int d);

struct TorusHittingOptions {
  std::size_t replicas = 100000;
  StepPolicy steps;
  bool bridge_correction = true;
};

struct TorusHittingReport {
  double empirical = 0.0;
  double se = 0.0;
  double ci_halfwidth = 0.0;
  HittingPrediction prediction;
  // Number of hits contributing to the angular test.
  std::size_t hits = 0;
  double angular_ks = 0.0;
  double angular_ks_p = 1.0;
};

// Law of the first coordinate of a uniform point on the unit sphere in R^d.
double sphere_coordinate_cdf(double u, int d);

TorusHittingReport validate_torus_hitting(double ell, double rho, double sigma, int d,
                                          const TorusHittingOptions& opt, SeedSpec seed);

struct IteratedHitFrequency {
  int k = 0;
  double frequency = 0.0;
  double se = 0.0;
};

std::vector<IteratedHitFrequency> iterated_hit_frequencies(double ell, double L, double rho, int d,
                                                           int k_max,
                                                           const TorusHittingOptions& opt,
                                                           SeedSpec seed);

}  // namespace occlab
