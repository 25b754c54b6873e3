#include "pfmtl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pfmtl {

namespace {

const std::vector<std::string> kKnownLabels = {"aggressive", "lazy", "itl", "oracle", "fixed"};
const std::vector<std::string> kCanonicalOrder = {"oracle", "aggressive", "lazy", "itl"};

constexpr const char* kTrainMetric = "cumulative_error_avg";
constexpr const char* kTestMetric = "mtl_test_error";
constexpr const char* kRegretMetric = "linear_regret";
constexpr const char* kBoundMetric = "bound_value";

[[noreturn]] void config_error(const std::string& what) { throw InvalidParameter("config: " + what); }

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      config_error("unknown key \"" + item.key() + "\"" + (where.empty() ? "" : " in " + where));
    }
  }
}

const nlohmann::json& require_key(const nlohmann::json& j, const char* name,
                                  const std::string& where) {
  if (!j.contains(name)) {
    config_error("missing key \"" + std::string(name) + "\"" +
                 (where.empty() ? "" : " in " + where));
  }
  return j.at(name);
}

template <typename T>
T typed(const nlohmann::json& j, const char* name, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("key \"" + std::string(name) + "\"" + (where.empty() ? "" : " in " + where) +
                 " has the wrong type");
  }
}

template <typename T>
T take(const nlohmann::json& j, const char* name, const std::string& where) {
  return typed<T>(require_key(j, name, where), name, where);
}

template <typename T>
T take_or(const nlohmann::json& j, const char* name, const std::string& where, T fallback) {
  if (!j.contains(name)) return fallback;
  return typed<T>(j.at(name), name, where);
}

EnvironmentConfig parse_environment(const nlohmann::json& j) {
  if (!j.is_object()) config_error("\"environment\" must be an object");
  EnvironmentConfig ec;
  ec.type = take<std::string>(j, "type", "environment");
  if (ec.type == "synthetic") {
    reject_unknown(j,
                   {"type", "task_count", "train_size", "dim", "theta_star", "task_std",
                    "test_fraction"},
                   "environment");
    ec.task_count = take<std::size_t>(j, "task_count", "environment");
    ec.train_size = take<std::size_t>(j, "train_size", "environment");
    ec.dim = take<std::size_t>(j, "dim", "environment");
    ec.theta_star = take<Vec>(j, "theta_star", "environment");
    ec.task_std = take<double>(j, "task_std", "environment");
    ec.test_fraction = take_or<double>(j, "test_fraction", "environment", 0.5);
    if (ec.theta_star.size() != ec.dim) {
      config_error("environment.theta_star must have environment.dim entries");
    }
  } else if (ec.type == "csv") {
    reject_unknown(j,
                   {"type", "path", "task_column", "feature_columns", "label_column",
                    "input_bound", "train_fraction", "truncate", "truncate_policy"},
                   "environment");
    ec.path = take<std::string>(j, "path", "environment");
    ec.schema.task_column = take<std::string>(j, "task_column", "environment");
    ec.schema.feature_columns =
        take<std::vector<std::string>>(j, "feature_columns", "environment");
    ec.schema.label_column = take<std::string>(j, "label_column", "environment");
    if (j.contains("input_bound")) {
      ec.input_bound = typed<double>(j.at("input_bound"), "input_bound", "environment");
      if (!(*ec.input_bound > 0.0)) config_error("environment.input_bound must be > 0");
    }
    ec.train_fraction = take_or<double>(j, "train_fraction", "environment", 0.8);
    if (!(ec.train_fraction > 0.0) || ec.train_fraction > 1.0) {
      config_error("environment.train_fraction must be in (0, 1]");
    }
    if (j.contains("truncate")) {
      ec.truncate = typed<std::size_t>(j.at("truncate"), "truncate", "environment");
      if (*ec.truncate == 0) config_error("environment.truncate must be >= 1");
    }
    const std::string policy =
        take_or<std::string>(j, "truncate_policy", "environment", "drop_short");
    if (policy == "drop_short") {
      ec.truncate_policy = TruncatePolicy::DropShort;
    } else if (policy == "subsample") {
      ec.truncate_policy = TruncatePolicy::Subsample;
    } else {
      config_error("environment.truncate_policy must be \"drop_short\" or \"subsample\"");
    }
  } else {
    config_error("environment.type must be \"synthetic\" or \"csv\"");
  }
  return ec;
}

EmitOptions parse_emit(const nlohmann::json& j) {
  if (!j.is_object()) config_error("\"emit\" must be an object");
  reject_unknown(j, {"series_csv", "summary_json", "ledger_csv"}, "emit");
  EmitOptions emit;
  emit.series_csv = take_or<bool>(j, "series_csv", "emit", true);
  emit.summary_json = take_or<bool>(j, "summary_json", "emit", true);
  emit.ledger_csv = take_or<bool>(j, "ledger_csv", "emit", false);
  return emit;
}

Environment make_environment(const EnvironmentConfig& ec, std::uint64_t seed) {
  if (ec.type == "synthetic") {
    return gen_synthetic(seed, ec.task_count, ec.train_size, ec.dim, ec.theta_star, ec.task_std,
                         ec.test_fraction);
  }
  Environment env = load_csv(ec.path, ec.schema, ec.input_bound);
  env = split_train_test(env, ec.train_fraction, seed);
  if (ec.truncate) env = truncate_tasks(env, *ec.truncate, ec.truncate_policy, seed);
  return env;
}

std::vector<Vec> make_comparators(const Environment& env, const LossSpec& loss,
                                  std::size_t lad_iterations) {
  std::vector<Vec> out;
  out.reserve(env.tasks.size());
  for (const Task& task : env.tasks) {
    if (task.target) {
      out.push_back(*task.target);
    } else {
      out.push_back(lad_fit(task.train, loss, lad_iterations));
    }
  }
  return out;
}

MetaLearner make_learner(const std::string& label, const ExperimentConfig& config,
                         const Environment& env, const std::vector<Vec>& comparators,
                         const LossSpec& loss) {
  const double L = loss.lipschitz;
  const double R = env.input_bound;
  if (label == "aggressive" || label == "lazy") {
    if (env.train_size == 0) {
      throw InvalidParameter("variant \"" + label +
                             "\" requires a common task length; truncate the environment first");
    }
    return label == "aggressive"
               ? MetaLearner::aggressive(config.inner_wealth, config.meta_wealth, L, R,
                                         env.train_size, env.dim)
               : MetaLearner::lazy(config.inner_wealth, config.meta_wealth, L, R, env.train_size,
                                   env.dim);
  }
  if (label == "itl") return MetaLearner::itl(config.inner_wealth, L, R, env.dim);
  if (label == "oracle") {
    return MetaLearner::fixed_bias(oracle_bias(comparators), config.inner_wealth, L, R);
  }
  if (label == "fixed") {
    if (config.fixed_bias.size() != env.dim) {
      config_error("fixed_bias must have the environment dimension (" + std::to_string(env.dim) +
                   ")");
    }
    return MetaLearner::fixed_bias(config.fixed_bias, config.inner_wealth, L, R);
  }
  config_error("unknown variant \"" + label + "\"");
}

double mean_test_loss(const Vec& w, const std::vector<DataPoint>& test, const LossSpec& loss) {
  double sum = 0.0;
  for (const DataPoint& p : test) sum += loss.value(dot(p.x, w), p.y);
  return sum / static_cast<double>(test.size());
}

struct BoundStats {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
};

void append_metric_rows(std::vector<ResultRow>& rows, const std::string& label,
                        const std::string& seed_str, const RunLedger& ledger,
                        const Environment& env, const std::vector<Vec>& comparators,
                        const LossSpec& loss, BoundStats& bounds) {
  const std::size_t T = ledger.tasks.size();
  const bool has_tests = std::all_of(env.tasks.begin(), env.tasks.end(),
                                     [](const Task& t) { return !t.test.empty(); });
  const bool uniform = env.train_size > 0;
  const Variant variant = ledger.variant;
  const bool meta_variant = variant == Variant::Aggressive || variant == Variant::Lazy;

  BoundInputs bi;
  bi.inner_wealth = ledger.inner_wealth;
  bi.meta_wealth = ledger.meta_wealth;
  bi.lipschitz = ledger.lipschitz;
  bi.input_bound = ledger.input_bound;
  bi.train_size = env.train_size;
  bi.comparators.reserve(T);

  double train_acc = 0.0;
  double test_acc = 0.0;
  double regret_acc = 0.0;
  std::size_t step_at = 0;
  for (std::size_t tt = 0; tt < T; ++tt) {
    const TaskEntry& te = ledger.tasks[tt];
    const std::size_t axis = tt + 1;
    train_acc += te.cumulative_loss / static_cast<double>(te.train_count);
    rows.push_back({label, seed_str, axis, kTrainMetric, train_acc / static_cast<double>(axis)});
    if (has_tests) {
      test_acc += mean_test_loss(te.avg_iterate, env.tasks[tt].test, loss);
      rows.push_back({label, seed_str, axis, kTestMetric, test_acc / static_cast<double>(axis)});
    }
    for (std::size_t i = 0; i < te.train_count; ++i, ++step_at) {
      const StepEntry& st = ledger.steps[step_at];
      regret_acc += st.linear_term - dot(st.gradient, comparators[tt]);
    }
    rows.push_back({label, seed_str, axis, kRegretMetric, regret_acc});
    if (uniform) {
      bi.comparators.push_back(comparators[tt]);
      bi.task_count = axis;
      bi.theta = meta_variant ? oracle_bias(bi.comparators) : ledger.tasks.front().start_bias;
      const double value =
          meta_variant ? bound_meta(bi, variant) : bound_fixed_bias(bi);
      rows.push_back({label, seed_str, axis, kBoundMetric, value});
      ++bounds.checked;
      bounds.max_ratio = std::max(bounds.max_ratio, regret_acc / value);
      if (regret_acc > value * (1.0 + 1e-9) + 1e-9) ++bounds.violations;
    }
  }
}

std::string seed_string(std::uint64_t seed) { return std::to_string(seed); }

void write_series(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "variant,seed,axis,metric,value\n";
  for (const ResultRow& r : rows) {
    out << r.variant << ',' << r.seed << ',' << r.axis << ',' << r.metric << ','
        << render_value(r.value) << '\n';
  }
}

}  // namespace

std::string render_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_ledger_csv(const std::string& path, const RunLedger& ledger) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "task,index,global,prediction,loss,linear_term,inner_gv,inner_p,meta_gv,meta_p\n";
  for (const StepEntry& st : ledger.steps) {
    out << st.task << ',' << st.index << ',' << st.global << ',' << render_value(st.prediction)
        << ',' << render_value(st.loss) << ',' << render_value(st.linear_term) << ','
        << render_value(st.inner_gv) << ',' << render_value(st.inner_p) << ','
        << render_value(st.meta_gv) << ',' << render_value(st.meta_p) << '\n';
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) config_error("document must be a JSON object");
  reject_unknown(j,
                 {"environment", "variants", "fixed_bias", "inner_wealth", "meta_wealth", "seeds",
                  "output_dir", "emit", "lad_iterations"},
                 "");
  ExperimentConfig config;
  config.raw = j;
  config.environment = parse_environment(require_key(j, "environment", ""));
  config.variants = take<std::vector<std::string>>(j, "variants", "");
  if (config.variants.empty()) config_error("\"variants\" must not be empty");
  std::set<std::string> seen;
  for (const std::string& label : config.variants) {
    if (std::find(kKnownLabels.begin(), kKnownLabels.end(), label) == kKnownLabels.end()) {
      config_error("unknown variant \"" + label + "\"");
    }
    if (!seen.insert(label).second) config_error("variant \"" + label + "\" listed twice");
  }
  config.fixed_bias = take_or<Vec>(j, "fixed_bias", "", Vec());
  if (seen.count("fixed") && config.fixed_bias.empty()) {
    config_error("variant \"fixed\" needs a non-empty \"fixed_bias\"");
  }
  config.inner_wealth = take_or<double>(j, "inner_wealth", "", 1.0);
  config.meta_wealth = take_or<double>(j, "meta_wealth", "", 1.0);
  if (!(config.inner_wealth > 0.0) || !(config.meta_wealth > 0.0)) {
    config_error("wealths must be > 0");
  }
  config.seeds = take<std::vector<std::uint64_t>>(j, "seeds", "");
  if (config.seeds.empty()) config_error("\"seeds\" must not be empty");
  std::set<std::uint64_t> seed_set(config.seeds.begin(), config.seeds.end());
  if (seed_set.size() != config.seeds.size()) config_error("duplicate entries in \"seeds\"");
  config.output_dir = take_or<std::string>(j, "output_dir", "", "");
  if (j.contains("emit")) config.emit = parse_emit(j.at("emit"));
  config.lad_iterations = take_or<std::size_t>(j, "lad_iterations", "", 10000);
  if (config.lad_iterations == 0) config_error("lad_iterations must be >= 1");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const LedgerSink& sink) {
  const LossSpec loss = abs_loss();
  ExperimentResult result;
  BoundStats bounds;
  // label -> metric -> per-seed final values, in config order
  std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, double>>>>
      finals;
  nlohmann::json environments = nlohmann::json::array();

  for (const std::uint64_t seed : config.seeds) {
    const Environment env = make_environment(config.environment, seed);
    environments.push_back(env.provenance);
    const std::vector<Vec> comparators = make_comparators(env, loss, config.lad_iterations);
    for (const std::string& label : config.variants) {
      MetaLearner learner = make_learner(label, config, env, comparators, loss);
      const RunLedger ledger = run_learner(learner, env, loss);
      ledger.validate();
      const std::size_t row_start = result.rows.size();
      append_metric_rows(result.rows, label, seed_string(seed), ledger, env, comparators, loss,
                         bounds);
      for (std::size_t r = row_start; r < result.rows.size(); ++r) {
        const ResultRow& row = result.rows[r];
        if (row.axis == ledger.tasks.size()) {
          finals[row.variant][row.metric].emplace_back(row.seed, row.value);
        }
      }
      if (sink) sink(label, seed, ledger);
    }
  }

  // Across-seed means, emitted in the order the first seed produced rows.
  std::unordered_map<std::string, std::pair<double, std::size_t>> mean_acc;
  auto row_key = [](const ResultRow& r) {
    return r.variant + '\0' + r.metric + '\0' + std::to_string(r.axis);
  };
  for (const ResultRow& r : result.rows) {
    auto& acc = mean_acc[row_key(r)];
    acc.first += r.value;
    acc.second += 1;
  }
  const std::string first_seed = seed_string(config.seeds.front());
  for (const ResultRow& r : result.rows) {
    if (r.seed != first_seed) continue;
    const auto& acc = mean_acc.at(row_key(r));
    if (acc.second != config.seeds.size()) continue;
    result.mean_rows.push_back(
        {r.variant, "mean", r.axis, r.metric, acc.first / static_cast<double>(acc.second)});
  }

  nlohmann::json finals_json;
  for (const auto& [label, metrics] : finals) {
    for (const auto& [metric, values] : metrics) {
      nlohmann::json per_seed;
      double sum = 0.0;
      for (const auto& [seed, value] : values) {
        per_seed[seed] = value;
        sum += value;
      }
      finals_json[label][metric] = {{"per_seed", per_seed},
                                    {"mean", sum / static_cast<double>(values.size())}};
    }
  }

  nlohmann::json ordering = nlohmann::json::array();
  for (const char* metric : {kTrainMetric, kTestMetric}) {
    std::vector<std::string> chain;
    for (const std::string& label : kCanonicalOrder) {
      if (finals.count(label) && finals.at(label).count(metric)) chain.push_back(label);
    }
    if (chain.size() < 2) continue;
    nlohmann::json values;
    bool satisfied = true;
    double prev = 0.0;
    for (std::size_t c = 0; c < chain.size(); ++c) {
      const double mean = finals_json[chain[c]][metric]["mean"].get<double>();
      values[chain[c]] = mean;
      if (c > 0 && mean < prev) satisfied = false;
      prev = mean;
    }
    ordering.push_back(
        {{"metric", metric}, {"chain", chain}, {"values", values}, {"satisfied", satisfied}});
  }

  result.summary = {{"config", config.raw},
                    {"loss", loss.name},
                    {"seeds", config.seeds},
                    {"variants", config.variants},
                    {"environments", environments},
                    {"finals", finals_json},
                    {"ordering", ordering},
                    {"bounds",
                     {{"checked", bounds.checked},
                      {"violations", bounds.violations},
                      {"max_regret_to_bound", bounds.max_ratio}}}};
  return result;
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result) {
  if (config.output_dir.empty()) throw InvalidParameter("config: output_dir is required to write");
  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path dir(config.output_dir);
  if (config.emit.series_csv) {
    write_series((dir / "series.csv").string(), result.rows);
    write_series((dir / "series_mean.csv").string(), result.mean_rows);
  }
  if (config.emit.summary_json) {
    std::ofstream out(dir / "summary.json");
    if (!out) throw ParseError("cannot write " + (dir / "summary.json").string());
    out << result.summary.dump(2) << '\n';
  }
}

SweepGrid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() != 4) {
    throw InvalidParameter("grid: expected \"min,max,count,spacing\", got \"" + text + "\"");
  }
  auto parse_number = [&text](const std::string& field, auto& value) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
      throw InvalidParameter("grid: non-numeric field \"" + field + "\" in \"" + text + "\"");
    }
  };
  SweepGrid grid;
  parse_number(parts[0], grid.min_value);
  parse_number(parts[1], grid.max_value);
  parse_number(parts[2], grid.count);
  grid.spacing = parts[3];
  if (grid.spacing != "linear" && grid.spacing != "log") {
    throw InvalidParameter("grid: spacing must be \"linear\" or \"log\"");
  }
  if (grid.count == 0) throw InvalidParameter("grid: count must be >= 1");
  if (!(grid.min_value > 0.0) || grid.max_value < grid.min_value) {
    throw InvalidParameter("grid: need 0 < min <= max");
  }
  return grid;
}

std::vector<double> grid_values(const SweepGrid& grid) {
  std::vector<double> values;
  values.reserve(grid.count);
  if (grid.count == 1) {
    values.push_back(grid.min_value);
    return values;
  }
  const double steps = static_cast<double>(grid.count - 1);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double f = static_cast<double>(i) / steps;
    if (grid.spacing == "linear") {
      values.push_back(grid.min_value + (grid.max_value - grid.min_value) * f);
    } else {
      values.push_back(
          std::exp(std::log(grid.min_value) + (std::log(grid.max_value / grid.min_value)) * f));
    }
  }
  return values;
}

SweepResult sweep_wealth(const ExperimentConfig& config, const SweepGrid& grid) {
  SweepResult result;
  result.wealths = grid_values(grid);
  const std::size_t count = result.wealths.size();
  for (const std::string& label : config.variants) {
    result.matrices[label].assign(count, std::vector<double>(count, 0.0));
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      ExperimentConfig cell = config;
      cell.inner_wealth = result.wealths[i];
      cell.meta_wealth = result.wealths[j];
      const ExperimentResult r = run_experiment(cell);
      for (const std::string& label : config.variants) {
        result.matrices[label][i][j] =
            r.summary["finals"][label][kTrainMetric]["mean"].get<double>();
      }
    }
  }
  nlohmann::json cells_json;
  for (const auto& [label, matrix] : result.matrices) {
    double lo = matrix[0][0];
    double hi = matrix[0][0];
    std::size_t lo_i = 0, lo_j = 0, hi_i = 0, hi_j = 0;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < count; ++j) {
        if (matrix[i][j] < lo) {
          lo = matrix[i][j];
          lo_i = i;
          lo_j = j;
        }
        if (matrix[i][j] > hi) {
          hi = matrix[i][j];
          hi_i = i;
          hi_j = j;
        }
      }
    }
    cells_json[label] = {
        {"min", lo},
        {"max", hi},
        {"max_to_min", lo > 0.0 ? hi / lo : 0.0},
        {"argmin", {{"inner_wealth", result.wealths[lo_i]}, {"meta_wealth", result.wealths[lo_j]}}},
        {"argmax", {{"inner_wealth", result.wealths[hi_i]}, {"meta_wealth", result.wealths[hi_j]}}}};
  }
  result.summary = {{"config", config.raw},
                    {"grid",
                     {{"min", grid.min_value},
                      {"max", grid.max_value},
                      {"count", grid.count},
                      {"spacing", grid.spacing},
                      {"values", result.wealths}}},
                    {"metric", kTrainMetric},
                    {"variants", cells_json}};
  return result;
}

void write_sweep(const ExperimentConfig& config, const SweepResult& result) {
  if (config.output_dir.empty()) throw InvalidParameter("config: output_dir is required to write");
  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path dir(config.output_dir);
  for (const auto& [label, matrix] : result.matrices) {
    std::ofstream out(dir / ("sweep_" + label + ".csv"));
    if (!out) throw ParseError("cannot write sweep matrix for " + label);
    out << "inner_wealth";
    for (double w : result.wealths) out << ',' << render_value(w);
    out << '\n';
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      out << render_value(result.wealths[i]);
      for (double cell : matrix[i]) out << ',' << render_value(cell);
      out << '\n';
    }
  }
  std::ofstream out(dir / "sweep_summary.json");
  if (!out) throw ParseError("cannot write sweep_summary.json");
  out << result.summary.dump(2) << '\n';
}

bool report(const std::string& dir, std::ostream& out) {
  const std::filesystem::path base(dir);
  const auto summary_path = base / "summary.json";
  const auto sweep_path = base / "sweep_summary.json";
  if (!std::filesystem::exists(summary_path) && !std::filesystem::exists(sweep_path)) {
    throw ParseError("report: neither summary.json nor sweep_summary.json found in " + dir);
  }
  bool ok = true;
  if (std::filesystem::exists(summary_path)) {
    std::ifstream in(summary_path);
    nlohmann::json summary;
    try {
      summary = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("report: " + summary_path.string() + ": " + e.what());
    }
    out << "experiment: " << dir << "\n";
    out << "seeds: " << summary.at("seeds").size() << ", loss: "
        << summary.at("loss").get<std::string>() << "\n\n";
    out << "final values (mean over seeds)\n";
    for (const auto& label : summary.at("variants")) {
      const std::string name = label.get<std::string>();
      out << "  " << name << "\n";
      if (!summary.at("finals").contains(name)) continue;
      for (const auto& [metric, entry] : summary.at("finals").at(name).items()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "    %-22s %.6g", metric.c_str(),
                      entry.at("mean").get<double>());
        out << buf << "\n";
      }
    }
    for (const auto& entry : summary.at("ordering")) {
      const bool satisfied = entry.at("satisfied").get<bool>();
      out << "ordering on " << entry.at("metric").get<std::string>() << ": ";
      bool first = true;
      for (const auto& label : entry.at("chain")) {
        if (!first) out << " <= ";
        first = false;
        const std::string name = label.get<std::string>();
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s (%.6g)", name.c_str(),
                      entry.at("values").at(name).get<double>());
        out << buf;
      }
      out << (satisfied ? "  [ok]" : "  [VIOLATED]") << "\n";
      ok = ok && satisfied;
    }
    const auto& bounds = summary.at("bounds");
    const auto violations = bounds.at("violations").get<std::size_t>();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "bound checks: %zu evaluated, %zu violated (max regret/bound %.6g)",
                  bounds.at("checked").get<std::size_t>(), violations,
                  bounds.at("max_regret_to_bound").get<double>());
    out << buf << (violations > 0 ? "  [VIOLATED]" : "") << "\n";
    ok = ok && violations == 0;
  }
  if (std::filesystem::exists(sweep_path)) {
    std::ifstream in(sweep_path);
    nlohmann::json sweep;
    try {
      sweep = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("report: " + sweep_path.string() + ": " + e.what());
    }
    out << "wealth sweep on " << sweep.at("metric").get<std::string>() << "\n";
    for (const auto& [label, cells] : sweep.at("variants").items()) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "  %-12s min %.6g, max %.6g, max/min %.6g", label.c_str(),
                    cells.at("min").get<double>(), cells.at("max").get<double>(),
                    cells.at("max_to_min").get<double>());
      out << buf << "\n";
    }
  }
  return ok;
}

}  // namespace pfmtl
