// Command-line driver for the experiment pipelines.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "occlab/experiments.hpp"

using namespace occlab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> replicas;
  std::size_t jobs = 1;
  bool fresh = false;
  bool verbose = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_option("--out", c.out, "output directory (overrides the config)");
  sub->add_option("--replicas", c.replicas, "replicas per grid value (overrides the config)");
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--fresh", c.fresh, "ignore rows persisted by an earlier run");
  sub->add_flag("-v,--verbose", c.verbose, "per-task progress on stderr");
}

void print_record(const RunRecord& r) {
  std::printf("%-12s %8s %14s %12s %14s %12s\n", "value", "reps", "mean", "se", "normalized", "norm_se");
  for (const auto& p : r.points)
    std::printf("%-12g %8zu %14.6g %12.4g %14.6g %12.4g\n", p.value, p.replicas, p.mean, p.se,
                p.normalized, p.normalized_se);
  if (r.fit.present)
    std::printf("fit: exponent %.4f +- %.4f (intercept %.4f)\n", r.fit.exponent, r.fit.ci, r.fit.intercept);
  for (const auto& [k, v] : r.stats) std::printf("%s = %.6g\n", k.c_str(), v);
  for (const auto& [k, v] : r.flags) std::printf("%s: %s\n", k.c_str(), v ? "yes" : "no");
  std::printf("record: %s/record.json\n", r.config.output.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupation-measure transport experiments"};
  app.require_subcommand(1);

  Common common;
  const std::vector<std::string> runs = {"constant", "fixed-n", "torus-rate", "concentration", "subadd", "hitting"};
  for (const auto& name : runs) add_common(app.add_subcommand(name, "run the " + name + " experiment"), common);

  std::string record_file, kind = "rate-fit", plot_out = ".";
  auto* plot = app.add_subcommand("plot", "write plot-data files from a record");
  plot->add_option("--record", record_file, "record.json of a finished run")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "rate-fit, plateau or sd-decay");
  plot->add_option("--out", plot_out, "directory for the .dat file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      auto path = emit_plot_data(load_record(record_file), kind, plot_out);
      std::cout << path.string() << '\n';
      return 0;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    ExperimentConfig cfg;
    if (!common.config.empty()) {
      cfg = load_config(common.config);
      if (cfg.experiment != name && !(name == "concentration" && cfg.experiment == "torus-rate") &&
          !(name == "torus-rate" && cfg.experiment == "concentration"))
        throw std::invalid_argument("config is for '" + cfg.experiment + "', not '" + name + "'");
    }
    cfg.experiment = name;
    if (common.seed) cfg.master_seed = *common.seed;
    if (!common.out.empty()) cfg.output = common.out;
    if (common.replicas) cfg.replicas = *common.replicas;
    RunOptions opt{common.jobs, !common.fresh, common.verbose};
    if (name == "constant") {
      auto [est, rec] = run_constant_estimation(cfg, opt);
      print_record(rec);
      std::printf("constant: %.6g +- %.4g (%s)\n", est.value, est.ci, est.method.c_str());
    } else {
      print_record(run_experiment(cfg, opt));
    }
  } catch (const HypothesisViolation& e) {
    std::cerr << "rejected: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
