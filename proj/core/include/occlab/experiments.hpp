#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occlab/config.hpp"

namespace occlab {

// Summary of one grid value (u, n or T).
struct GridPoint {
  double value = 0.0;
  std::size_t replicas = 0;
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  double mean_mass = 0.0;
  // Cost divided by the predicted growth (u^e |Omega|, (n/Cap)^e |Omega| or T^e).
  double normalized = 0.0;
  double normalized_se = 0.0;
  double normalized_sd = 0.0;
  // Standard error of normalized_sd (normal approximation).
  double normalized_sd_se = 0.0;
  // Half-stride control: mean of cost(half stride) - cost, when run.
  std::size_t control_replicas = 0;
  double control_bias = 0.0;
  double control_bias_se = 0.0;
};

struct FitRecord {
  bool present = false;
  double exponent = 0.0;
  double intercept = 0.0;
  // 95% half-width.
  double ci = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<GridPoint> points;
  FitRecord fit;
  // Named scalar results (estimates, test statistics, p-values).
  std::map<std::string, double> stats;
  // Named pass/fail outcomes of the experiment's checks.
  std::map<std::string, bool> flags;
  std::string started;
  std::string finished;
  std::string code_version;
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
void save_record(const std::filesystem::path& file, const RunRecord& r);
RunRecord load_record(const std::filesystem::path& file);

struct ConstantEstimate {
  double value = 0.0;
  // 95% half-width from the replica variance.
  double ci = 0.0;
  std::vector<double> grid;
  // "last-point" or "richardson".
  std::string method;
};

// One row of results.csv.
struct ReplicaRow {
  double grid_value = 0.0;
  std::size_t replica = 0;
  double cost = 0.0;
  double mass = 0.0;
  double wall_ms = 0.0;
};

void append_rows_csv(const std::filesystem::path& file, const std::vector<ReplicaRow>& rows);
std::vector<ReplicaRow> read_rows_csv(const std::filesystem::path& file);

struct RunOptions {
  std::size_t jobs = 1;
  // Reuse rows already persisted in the output directory.
  bool resume = true;
  // Progress lines on stderr.
  bool verbose = false;
};

std::pair<ConstantEstimate, RunRecord> run_constant_estimation(const ExperimentConfig& c,
                                                               const RunOptions& opt = {});
RunRecord run_fixed_n_limit(const ExperimentConfig& c, const RunOptions& opt = {});
RunRecord run_torus_rate(const ExperimentConfig& c, const RunOptions& opt = {});
// Same samples as run_torus_rate (shared when both use one output directory).
RunRecord run_concentration(const ExperimentConfig& c, const RunOptions& opt = {});
RunRecord run_cube_subadditivity(const ExperimentConfig& c, const RunOptions& opt = {});
RunRecord run_hitting_validation(const ExperimentConfig& c, const RunOptions& opt = {});

// Dispatch on c.experiment.
RunRecord run_experiment(const ExperimentConfig& c, const RunOptions& opt = {});

// Writes <dir>/<kind>.dat with columns x y y_err; kinds: rate-fit, plateau,
// sd-decay. Returns the file written.
std::filesystem::path emit_plot_data(const RunRecord& r, const std::string& kind,
                                     const std::filesystem::path& dir);

}  // namespace occlab
