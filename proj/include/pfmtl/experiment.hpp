#pragma once

#include <iosfwd>
#include <map>

#include "pfmtl/evaluation.hpp"

namespace pfmtl {

// Which files run_experiment leaves in the output directory.
struct EmitOptions {
  bool series_csv = true;
  bool summary_json = true;
  bool ledger_csv = false;
};

// Describes where tasks come from. Exactly one of the two shapes is active,
// selected by `type` ("synthetic" or "csv").
struct EnvironmentConfig {
  std::string type;

  // synthetic
  std::size_t task_count = 0;
  std::size_t train_size = 0;
  std::size_t dim = 0;
  Vec theta_star;
  double task_std = 0.0;
  double test_fraction = 0.5;

  // csv
  std::string path;
  CsvSchema schema;
  std::optional<double> input_bound;
  double train_fraction = 0.8;
  std::optional<std::size_t> truncate;
  TruncatePolicy truncate_policy = TruncatePolicy::DropShort;
};

struct ExperimentConfig {
  EnvironmentConfig environment;
  // Run labels: aggressive, lazy, itl, oracle (fixed bias at the comparator
  // mean) or fixed (bias taken from fixed_bias below).
  std::vector<std::string> variants;
  Vec fixed_bias;
  double inner_wealth = 1.0;
  double meta_wealth = 1.0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  EmitOptions emit;
  std::size_t lad_iterations = 10000;
  // The document the config was parsed from, echoed into the summary.
  nlohmann::json raw;
};

// Strict parse: unknown or ill-typed keys raise InvalidParameter naming the
// offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// One cell of the long-format series output.
struct ResultRow {
  std::string variant;
  std::string seed;  // seed number, or "mean" for the across-seed average
  std::size_t axis = 0;  // task index the value is recorded at
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;       // per-seed series
  std::vector<ResultRow> mean_rows;  // across-seed means
  nlohmann::json summary;
};

// Called with each finished run when the caller wants the raw ledgers too.
using LedgerSink =
    std::function<void(const std::string& variant, std::uint64_t seed, const RunLedger& ledger)>;

// Runs every configured variant on every seed's environment and collects the
// per-task series (training error, test error, linear regret, bound value)
// plus a summary with finals, the expected variant ordering and a count of
// bound violations.
ExperimentResult run_experiment(const ExperimentConfig& config, const LedgerSink& sink = {});

// Writes series.csv, series_mean.csv, summary.json and optional per-run
// ledgers into config.output_dir.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result);

// One CSV row per processed point: counters, prediction, loss and the scalar
// feeds of the four primitives.
void write_ledger_csv(const std::string& path, const RunLedger& ledger);

struct SweepGrid {
  double min_value = 0.0;
  double max_value = 0.0;
  std::size_t count = 0;
  std::string spacing = "linear";  // or "log"
};
SweepGrid parse_grid(const std::string& text);
std::vector<double> grid_values(const SweepGrid& grid);

struct SweepResult {
  std::vector<double> wealths;
  // variant -> count x count matrix of the across-seed mean final training
  // error, inner wealth on rows, meta wealth on columns.
  std::map<std::string, std::vector<std::vector<double>>> matrices;
  nlohmann::json summary;
};

// Reruns the experiment on every (inner wealth, meta wealth) grid cell.
SweepResult sweep_wealth(const ExperimentConfig& config, const SweepGrid& grid);
void write_sweep(const ExperimentConfig& config, const SweepResult& result);

// Reads a previously written output directory and prints the summary tables.
// Returns false when a check it reports on (variant ordering, bound
// violations) failed.
bool report(const std::string& dir, std::ostream& out);

// Shortest fixed-precision rendering used for all CSV numbers.
std::string render_value(double v);

}  // namespace pfmtl
