#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occlab/geometry.hpp"

namespace occlab {

// Thrown when a configuration violates the (d, p) region an experiment
// relies on; the message names the hypothesis.
class HypothesisViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string experiment = "fixed-n";
  int d = 3;
  double p = 0.25;
  // u-list, T-list or n-list depending on the experiment.
  std::vector<double> grid;
  std::size_t replicas = 100;

  // dt <= 0 selects a scale-based default; adapt/dt_max feed StepPolicy.
  double dt = 0.0;
  double dt_adapt = 0.3;
  double dt_max = 1e6;

  int grid_n = 16;
  std::string solver = "exact";
  // Escape radius of the interlacement paths; <= 0 selects 50 x circumradius.
  double r_max = 0.0;
  std::uint64_t master_seed = 1;
  std::string output = "run";

  // Observation window: "ball" (radius omega_size) or "cube" (side omega_size).
  std::string domain = "ball";
  double omega_size = 1.0;
  // Cap on source atoms handed to the solver; occupation is subsampled
  // with a stride to respect it.
  std::size_t atom_cap = 2000;
  std::size_t sweep_replicas = 100000;

  double exponent_tol = 0.07;
  double plateau_tol = 0.25;
  double cv_tol = 0.20;
  double limsup_tol = 0.25;
  // Constant to compare torus statistics against; <= 0 disables.
  double c_hat = 0.0;
  bool extrapolate = false;
  bool depoissonize = false;
  // Replicas per grid point re-solved with half the stride.
  std::size_t control_replicas = 0;

  // Cube subadditivity.
  double cube_L = 2.0;
  int cube_m = 2;
  double slack_C = 0.0;

  // Torus hitting.
  double ell = 0.02;
  double rho = 2.0;
  double sigma = 0.0;
  double torus_L = 0.25;
  int k_max = 3;
};

// Unknown keys and type mismatches throw std::invalid_argument.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& file);

// Structural checks plus hypothesis gating for the named experiment.
void validate_config(const ExperimentConfig& c);

// 1 - p/(d-2).
double rate_exponent(int d, double p);

// Observation window described by the config, centered at the origin.
Domain config_domain(const ExperimentConfig& c);

}  // namespace occlab
