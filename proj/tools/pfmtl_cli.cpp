// Experiment driver: run a configured set of learners, sweep their wealth
// parameters, or pretty-print a finished output directory.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pfmtl/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  const pfmtl::ExperimentConfig config = pfmtl::load_config(config_path);
  if (config.output_dir.empty()) {
    throw pfmtl::InvalidParameter("config: \"output_dir\" is required for run");
  }
  std::filesystem::create_directories(config.output_dir);
  pfmtl::LedgerSink sink;
  if (config.emit.ledger_csv) {
    const std::filesystem::path dir(config.output_dir);
    sink = [dir](const std::string& variant, std::uint64_t seed, const pfmtl::RunLedger& ledger) {
      const auto path = dir / ("ledger_" + variant + "_seed" + std::to_string(seed) + ".csv");
      pfmtl::write_ledger_csv(path.string(), ledger);
    };
  }
  const pfmtl::ExperimentResult result = pfmtl::run_experiment(config, sink);
  pfmtl::write_experiment(config, result);
  std::cout << "wrote " << config.output_dir << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_text) {
  const pfmtl::ExperimentConfig config = pfmtl::load_config(config_path);
  if (config.output_dir.empty()) {
    throw pfmtl::InvalidParameter("config: \"output_dir\" is required for sweep-wealth");
  }
  const pfmtl::SweepGrid grid = pfmtl::parse_grid(grid_text);
  const pfmtl::SweepResult result = pfmtl::sweep_wealth(config, grid);
  pfmtl::write_sweep(config, result);
  std::cout << "wrote " << config.output_dir << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  return pfmtl::report(dir, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parameter-free multi-task learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_text;
  std::string report_dir;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("--config", config_path, "JSON experiment config")->required();

  CLI::App* sweep = app.add_subcommand("sweep-wealth", "rerun over a wealth grid");
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  sweep->add_option("--grid", grid_text, "min,max,count,spacing (linear or log)")->required();

  CLI::App* report = app.add_subcommand("report", "summarize a finished output directory");
  report->add_option("--dir", report_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_text);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
