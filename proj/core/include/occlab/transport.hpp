#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "occlab/geometry.hpp"

namespace occlab {

enum class Metric { Euclidean, TorusFlat };

struct TransportProblem {
  WeightedAtoms source;
  WeightedAtoms target;
  double p = 1.0;
  Metric metric = Metric::Euclidean;
};

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double cost = 0.0;
};

struct SolveReport {
  std::string solver;
  double cost = 0.0;
  // Upper bound on cost - optimum (0 for exact solvers).
  double gap = 0.0;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
  bool converged = true;
  double marginal_violation = 0.0;
};

class SizeCapExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Throws on mass mismatch beyond 1e-9 of the larger atom mass.
void validate_problem(const TransportProblem& pb);
// Row-major n_source x n_target matrix of d(x_i, y_j)^p.
std::vector<double> cost_matrix(const TransportProblem& pb);

struct ExactOptions {
  std::size_t max_entries = 4'000'000;
};

std::pair<TransportPlan, SolveReport> wasserstein_exact(const TransportProblem& pb,
                                                        const ExactOptions& opt = {});

// Minimum over permutations; equal counts n <= 8 and equal masses only.
double wasserstein_bruteforce(const TransportProblem& pb);

struct EntropicOptions {
  // Strictly decreasing; empty selects the default geometric schedule.
  std::vector<double> epsilon_schedule;
  std::size_t max_iter = 5000;
  // Relative L1 marginal violation at which a stage stops.
  double tol = 1e-6;
  bool debias = false;
};

struct EntropicResult {
  double cost = 0.0;
  SolveReport report;
  // Rounded-plan cost after each stage.
  std::vector<double> stage_costs;
  std::vector<double> schedule;
};

std::vector<double> default_epsilon_schedule(const std::vector<double>& costs);
EntropicResult wasserstein_entropic(const TransportProblem& pb, const EntropicOptions& opt = {});

enum class SolverChoice { Exact, Entropic };

struct UniformCost {
  double cost = 0.0;
  // diam(cell)^p * mass.
  double discretization_bound = 0.0;
  double mass = 0.0;
  std::size_t source_atoms = 0;
  std::size_t target_atoms = 0;
  SolveReport report;
};

// W^p between mu restricted to omega and the uniform measure of equal mass,
// with the uniform measure replaced by a grid of cell centers.
UniformCost wasserstein_to_uniform(const WeightedAtoms& mu, const Domain& omega, double p,
                                   int grid_n, SolverChoice solver = SolverChoice::Exact,
                                   const ExactOptions& exact = {},
                                   const EntropicOptions& entropic = {});

struct SubadditivityCheck {
  bool holds = true;
  // W(mu1) + W(mu2) - W(mu1 + mu2).
  double slack = 0.0;
  double joint = 0.0;
  double parts = 0.0;
};

SubadditivityCheck check_subadditivity(const WeightedAtoms& mu1, const WeightedAtoms& mu2,
                                       const WeightedAtoms& lambda1, const WeightedAtoms& lambda2,
                                       double p, Metric metric = Metric::Euclidean);

WeightedAtoms merge_measures(const WeightedAtoms& a, const WeightedAtoms& b);

}  // namespace occlab
