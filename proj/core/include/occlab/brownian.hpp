#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "occlab/geometry.hpp"
#include "occlab/rng.hpp"

namespace occlab {

// Uniformly time-discretized path. Step k (k < steps()) has length dt except
// the last, which has length last_dt (a partial step when T is not a
// multiple of dt).
struct PathSample {
  double t0 = 0.0;
  double dt = 0.0;
  double last_dt = 0.0;
  double duration = 0.0;
  std::size_t dim = 0;
  Space space = Space::Euclidean;
  std::vector<double> positions;

  std::size_t size() const { return dim ? positions.size() / dim : 0; }
  std::size_t steps() const { return size() ? size() - 1 : 0; }
  std::span<const double> position(std::size_t i) const { return {positions.data() + i * dim, dim}; }
  double step_length(std::size_t k) const { return k + 1 == steps() ? last_dt : dt; }
  double elapsed() const { return duration; }
};

using NormalSource = std::function<double()>;

// Largest step keeping per-step displacement about length_scale/10.
double dt_for_scale(double length_scale);

PathSample sample_bm_path(const Point& x0, double T, double dt, Space space, SeedSpec seed);
// Same sampler with an injected Gaussian source (test hook).
PathSample sample_bm_path(const Point& x0, double T, double dt, Space space,
                          const NormalSource& normal);

// Left-point occupation measure of a path.
WeightedAtoms occupation_atoms(const PathSample& path, std::size_t stride);
// Sum of step lengths over steps whose left endpoint lies in omega.
double occupation_mass_in(const PathSample& path, const Domain& omega);

// Streams the path without storing it; yields the same atoms as
// occupation_atoms(sample_bm_path(...), stride) for the same seed.
WeightedAtoms sample_occupation_atoms(const Point& x0, double T, double dt, Space space,
                                      std::size_t stride, SeedSpec seed);

struct HeatKernelValue {
  double density = 0.0;
  // Bound on the omitted lattice images.
  double truncation_bound = 0.0;
};

// Torus heat kernel. lattice_cutoff bounds the images |z| <= K per axis for
// t <= 1/4 and the Fourier modes |k| <= K beyond.
HeatKernelValue heat_kernel_torus(const TorusPoint& x, const TorusPoint& y, double t,
                                  int lattice_cutoff);

// Step-size rule. With adapt > 0, a step started at distance g from the
// target has length clamp((adapt*g)^2, dt, dt_max); otherwise dt.
struct StepPolicy {
  double dt = 1e-2;
  double adapt = 0.0;
  double dt_max = 0.0;

  double step(double gap) const;
};

struct HitOptions {
  double T_max = std::numeric_limits<double>::infinity();
  StepPolicy steps;
  bool bridge_correction = true;
  // Euclidean only: stop when the distance to the target's center reaches this.
  double escape_radius = std::numeric_limits<double>::infinity();
};

struct HitResult {
  bool hit = false;
  bool escaped = false;
  double hit_time = 0.0;
  std::vector<double> hit_point;
  double final_time = 0.0;
  std::vector<double> final_state;
  std::size_t steps = 0;
};

// First entrance into a ball or cube (the name follows the common case).
HitResult first_hit(std::span<const double> x0, const Domain& target, const HitOptions& opt,
                    Rng& rng);
HitResult first_hit_ball(const Point& x0, const Domain& ball, const HitOptions& opt,
                         SeedSpec seed);

struct ExitOptions {
  double T_max = std::numeric_limits<double>::infinity();
  double dt = 1e-2;
  bool bridge_correction = true;
};

struct ExitResult {
  bool censored = false;
  double exit_time = 0.0;
  std::vector<double> exit_point;
};

ExitResult first_exit_ball(const Point& x0, const Domain& ball, const ExitOptions& opt,
                           SeedSpec seed);

struct OccupationRun {
  // Mass recorded in K.
  double mass = 0.0;
  bool escaped = false;
  double elapsed = 0.0;
  std::size_t steps = 0;
};

struct OccupationOptions {
  StepPolicy steps;
  double escape_radius = std::numeric_limits<double>::infinity();
  double T_max = std::numeric_limits<double>::infinity();
  // Consecutive in-K steps merged per atom.
  std::size_t stride = 1;
};

// Runs a Euclidean path from x0 until it leaves the escape ball around K's
// center (or T_max), appending left-point occupation atoms inside K to out
// (if non-null). Steps taken inside K always use the base dt.
OccupationRun accumulate_occupation(std::span<const double> x0, const Domain& K,
                                    const OccupationOptions& opt, Rng& rng, WeightedAtoms* out);

}  // namespace occlab
