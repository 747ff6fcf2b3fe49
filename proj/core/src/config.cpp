#include "occlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace occlab {

namespace {

template <class T>
void take(const nlohmann::json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

const std::vector<std::string> kKeys = {
    "experiment", "d",           "p",          "grid",           "replicas",     "dt",
    "dt_adapt",   "dt_max",      "grid_n",     "solver",         "r_max",        "master_seed",
    "output",     "domain",      "omega_size", "atom_cap",       "sweep_replicas", "exponent_tol",
    "plateau_tol", "cv_tol",     "limsup_tol", "c_hat",          "extrapolate",  "depoissonize",
    "control_replicas", "cube_L", "cube_m",    "slack_C",        "ell",          "rho",
    "sigma",      "torus_L",     "k_max"};

const std::vector<std::string> kExperiments = {"constant",      "fixed-n", "torus-rate",
                                               "concentration", "subadd",  "hitting"};

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end())
      throw std::invalid_argument("unknown config key '" + k + "'");
  ExperimentConfig c;
  take(j, "experiment", c.experiment);
  take(j, "d", c.d);
  take(j, "p", c.p);
  take(j, "grid", c.grid);
  take(j, "replicas", c.replicas);
  take(j, "dt", c.dt);
  take(j, "dt_adapt", c.dt_adapt);
  take(j, "dt_max", c.dt_max);
  take(j, "grid_n", c.grid_n);
  take(j, "solver", c.solver);
  take(j, "r_max", c.r_max);
  take(j, "master_seed", c.master_seed);
  take(j, "output", c.output);
  take(j, "domain", c.domain);
  take(j, "omega_size", c.omega_size);
  take(j, "atom_cap", c.atom_cap);
  take(j, "sweep_replicas", c.sweep_replicas);
  take(j, "exponent_tol", c.exponent_tol);
  take(j, "plateau_tol", c.plateau_tol);
  take(j, "cv_tol", c.cv_tol);
  take(j, "limsup_tol", c.limsup_tol);
  take(j, "c_hat", c.c_hat);
  take(j, "extrapolate", c.extrapolate);
  take(j, "depoissonize", c.depoissonize);
  take(j, "control_replicas", c.control_replicas);
  take(j, "cube_L", c.cube_L);
  take(j, "cube_m", c.cube_m);
  take(j, "slack_C", c.slack_C);
  take(j, "ell", c.ell);
  take(j, "rho", c.rho);
  take(j, "sigma", c.sigma);
  take(j, "torus_L", c.torus_L);
  take(j, "k_max", c.k_max);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"d", c.d},
          {"p", c.p},
          {"grid", c.grid},
          {"replicas", c.replicas},
          {"dt", c.dt},
          {"dt_adapt", c.dt_adapt},
          {"dt_max", c.dt_max},
          {"grid_n", c.grid_n},
          {"solver", c.solver},
          {"r_max", c.r_max},
          {"master_seed", c.master_seed},
          {"output", c.output},
          {"domain", c.domain},
          {"omega_size", c.omega_size},
          {"atom_cap", c.atom_cap},
          {"sweep_replicas", c.sweep_replicas},
          {"exponent_tol", c.exponent_tol},
          {"plateau_tol", c.plateau_tol},
          {"cv_tol", c.cv_tol},
          {"limsup_tol", c.limsup_tol},
          {"c_hat", c.c_hat},
          {"extrapolate", c.extrapolate},
          {"depoissonize", c.depoissonize},
          {"control_replicas", c.control_replicas},
          {"cube_L", c.cube_L},
          {"cube_m", c.cube_m},
          {"slack_C", c.slack_C},
          {"ell", c.ell},
          {"rho", c.rho},
          {"sigma", c.sigma},
          {"torus_L", c.torus_L},
          {"k_max", c.k_max}};
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read config " + file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(file + ": " + e.what());
  }
  return config_from_json(j);
}

double rate_exponent(int d, double p) { return 1.0 - p / (d - 2.0); }

void validate_config(const ExperimentConfig& c) {
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end())
    throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
  if (c.d < 3) throw HypothesisViolation("transience: the experiments need d >= 3");
  if (!(c.p > 0)) throw std::invalid_argument("p must be > 0");
  if (c.replicas < 2) throw std::invalid_argument("need at least 2 replicas for standard errors");
  if (c.solver != "exact" && c.solver != "entropic")
    throw std::invalid_argument("solver must be 'exact' or 'entropic'");
  if (c.domain != "ball" && c.domain != "cube")
    throw std::invalid_argument("domain must be 'ball' or 'cube'");
  if (!(c.omega_size > 0)) throw std::invalid_argument("omega_size must be > 0");
  if (c.grid_n < 1) throw std::invalid_argument("grid_n must be >= 1");
  if (c.atom_cap < 1) throw std::invalid_argument("atom_cap must be >= 1");

  const bool limit = c.experiment == "constant" || c.experiment == "fixed-n" ||
                     c.experiment == "torus-rate" || c.experiment == "concentration";
  if (limit && c.d <= 4 && !(c.p < (c.d - 2) / 2.0))
    throw HypothesisViolation("limit hypothesis: d in {3,4} requires p < (d-2)/2 (got d=" +
                              std::to_string(c.d) + ", p=" + std::to_string(c.p) + ")");
  if (c.experiment == "concentration" && !(c.p < (c.d - 2) / 3.0))
    throw HypothesisViolation("concentration hypothesis: requires p < (d-2)/3");
  if (limit) {
    if (c.grid.empty()) throw std::invalid_argument("parameter grid is empty");
    for (double g : c.grid)
      if (!(g > 0)) throw std::invalid_argument("grid values must be > 0");
    if (!std::is_sorted(c.grid.begin(), c.grid.end()) ||
        std::adjacent_find(c.grid.begin(), c.grid.end()) != c.grid.end())
      throw std::invalid_argument("grid values must be strictly increasing");
  }
  if (c.experiment == "fixed-n")
    for (double g : c.grid)
      if (g != std::floor(g)) throw std::invalid_argument("fixed-n grid must hold integers");
  if (c.experiment == "concentration" && c.grid.size() < 2)
    throw std::invalid_argument("concentration trend needs at least two T values");
  if (c.experiment == "subadd") {
    if (c.cube_m < 1 || c.cube_m > 3) throw std::invalid_argument("cube_m must be 1, 2 or 3");
    if (!(c.cube_L > 0)) throw std::invalid_argument("cube_L must be > 0");
    const double r = c.d - 2.0 - 2.0 * std::min(c.p, 1.0);
    if (!(r > 0))
      throw HypothesisViolation("sub-additivity hypothesis: r = d - 2 - 2 min(p,1) must be > 0 (got " +
                                std::to_string(r) + ")");
  }
  if (c.experiment == "hitting") {
    if (!(c.ell > 0 && c.ell < 0.5)) throw std::invalid_argument("ell must be in (0, 1/2)");
    if (!(c.sigma >= 0 && c.sigma <= c.rho)) throw std::invalid_argument("needs 0 <= sigma <= rho");
  }
}

Domain config_domain(const ExperimentConfig& c) {
  Point origin(std::vector<double>(c.d, 0.0));
  return c.domain == "ball" ? Domain::ball(origin, c.omega_size) : Domain::cube(origin, c.omega_size);
}

}  // namespace occlab
