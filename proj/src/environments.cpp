#include "pfmtl/environments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

namespace pfmtl {

namespace {

Vec sphere_point(std::mt19937_64& rng, std::normal_distribution<double>& normal, std::size_t dim) {
  Vec x(dim);
  double n = 0.0;
  do {
    for (double& c : x) c = normal(rng);
    n = norm(x);
  } while (n < 1e-12);
  for (double& c : x) c /= n;
  return x;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trimmed(line.substr(start)));
      break;
    }
    out.push_back(trimmed(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_field(const std::string& field, const std::string& path, std::size_t row,
                   const std::string& column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(path + " row " + std::to_string(row) + ": column \"" + column +
                     "\" has non-numeric value \"" + field + "\"");
  }
  return value;
}

std::size_t common_train_size(const std::vector<Task>& tasks) {
  if (tasks.empty()) return 0;
  const std::size_t n = tasks.front().train.size();
  for (const Task& t : tasks) {
    if (t.train.size() != n) return 0;
  }
  return n;
}

}  // namespace

Environment gen_synthetic(std::uint64_t seed, std::size_t task_count, std::size_t train_size,
                          std::size_t dim, const Vec& theta_star, double task_std,
                          double test_fraction) {
  if (task_count == 0) throw InvalidParameter("gen_synthetic: task_count must be >= 1");
  if (train_size == 0) throw InvalidParameter("gen_synthetic: train_size must be >= 1");
  if (dim == 0) throw InvalidParameter("gen_synthetic: dim must be >= 1");
  if (theta_star.size() != dim) {
    throw DimensionMismatch("gen_synthetic: theta_star has dim " +
                            std::to_string(theta_star.size()) + ", expected " +
                            std::to_string(dim));
  }
  if (task_std < 0.0) throw InvalidParameter("gen_synthetic: task_std must be >= 0");
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw InvalidParameter("gen_synthetic: test_fraction must be in [0, 1)");
  }

  std::size_t test_count = 0;
  if (test_fraction > 0.0) {
    const double raw =
        static_cast<double>(train_size) * test_fraction / (1.0 - test_fraction);
    test_count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Environment env;
  env.dim = dim;
  env.input_bound = 1.0;
  env.train_size = train_size;
  env.tasks.reserve(task_count);
  for (std::size_t t = 1; t <= task_count; ++t) {
    Task task;
    task.id = std::to_string(t);
    Vec w(theta_star);
    for (double& c : w) c += task_std * normal(rng);
    const double noise_std = norm(w) / std::sqrt(static_cast<double>(dim));
    auto draw = [&]() {
      DataPoint p;
      p.x = sphere_point(rng, normal, dim);
      p.y = dot(p.x, w) + noise_std * normal(rng);
      return p;
    };
    task.train.reserve(train_size);
    for (std::size_t i = 0; i < train_size; ++i) task.train.push_back(draw());
    task.test.reserve(test_count);
    for (std::size_t i = 0; i < test_count; ++i) task.test.push_back(draw());
    task.target = std::move(w);
    env.tasks.push_back(std::move(task));
  }
  env.provenance = {{"type", "synthetic"},
                    {"seed", seed},
                    {"task_count", task_count},
                    {"train_size", train_size},
                    {"dim", dim},
                    {"theta_star", theta_star},
                    {"task_std", task_std},
                    {"test_fraction", test_fraction}};
  return env;
}

Environment load_csv(const std::string& path, const CsvSchema& schema,
                     std::optional<double> declared_input_bound) {
  if (schema.feature_columns.empty()) {
    throw InvalidParameter("load_csv: at least one feature column is required");
  }
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const std::vector<std::string> header = split_fields(line);
  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t j = 0; j < header.size(); ++j) column_index.emplace(header[j], j);

  auto find_column = [&](const std::string& name) {
    const auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw ParseError(path + " row 1: column \"" + name + "\" not found in header");
    }
    return it->second;
  };
  const std::size_t task_idx = find_column(schema.task_column);
  const std::size_t label_idx = find_column(schema.label_column);
  std::vector<std::size_t> feature_idx;
  feature_idx.reserve(schema.feature_columns.size());
  for (const std::string& name : schema.feature_columns) feature_idx.push_back(find_column(name));

  Environment env;
  env.dim = schema.feature_columns.size();
  std::unordered_map<std::string, std::size_t> task_slot;
  double measured_bound = 0.0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(path + " row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    const std::string& task_id = fields[task_idx];
    if (task_id.empty()) {
      throw ParseError(path + " row " + std::to_string(row) + ": empty task id");
    }
    DataPoint p;
    p.x.reserve(env.dim);
    for (std::size_t j = 0; j < feature_idx.size(); ++j) {
      p.x.push_back(parse_field(fields[feature_idx[j]], path, row, schema.feature_columns[j]));
    }
    p.y = parse_field(fields[label_idx], path, row, schema.label_column);

    const double x_norm = norm(p.x);
    if (declared_input_bound) {
      if (x_norm > *declared_input_bound * (1.0 + kBoundSlack)) {
        throw InputBoundViolation(path + " row " + std::to_string(row) + ": input norm " +
                                  std::to_string(x_norm) + " exceeds declared bound " +
                                  std::to_string(*declared_input_bound));
      }
    } else {
      measured_bound = std::max(measured_bound, x_norm);
    }

    const auto it = task_slot.find(task_id);
    std::size_t slot = 0;
    if (it == task_slot.end()) {
      slot = env.tasks.size();
      task_slot.emplace(task_id, slot);
      Task task;
      task.id = task_id;
      env.tasks.push_back(std::move(task));
    } else {
      slot = it->second;
    }
    env.tasks[slot].train.push_back(std::move(p));
  }
  if (env.tasks.empty()) throw ParseError(path + ": no data rows");

  if (declared_input_bound) {
    env.input_bound = *declared_input_bound;
  } else {
    if (measured_bound <= 0.0) {
      throw ParseError(path + ": all inputs are zero, cannot measure an input bound");
    }
    env.input_bound = measured_bound;
  }
  env.train_size = common_train_size(env.tasks);
  env.provenance = {{"type", "csv"},
                    {"path", path},
                    {"task_column", schema.task_column},
                    {"feature_columns", schema.feature_columns},
                    {"label_column", schema.label_column},
                    {"input_bound_declared", declared_input_bound.has_value()},
                    {"input_bound", env.input_bound}};
  return env;
}

Environment split_train_test(const Environment& env, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw InvalidParameter("split_train_test: train_fraction must be in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  Environment out = env;
  for (Task& task : out.tasks) {
    std::vector<DataPoint> pool = std::move(task.train);
    pool.insert(pool.end(), task.test.begin(), task.test.end());
    if (pool.empty()) {
      throw InvalidParameter("split_train_test: task \"" + task.id + "\" has no points");
    }
    task.test.clear();
    if (train_fraction == 1.0) {
      task.train = std::move(pool);
      continue;
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto cut = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(pool.size()))));
    task.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cut));
    task.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(cut), pool.end());
  }
  out.train_size = common_train_size(out.tasks);
  out.provenance = env.provenance;
  out.provenance["split"] = {{"train_fraction", train_fraction}, {"seed", seed}};
  return out;
}

Environment truncate_tasks(const Environment& env, std::size_t common_size, TruncatePolicy policy,
                           std::uint64_t seed) {
  if (common_size == 0) throw InvalidParameter("truncate_tasks: common_size must be >= 1");
  std::mt19937_64 rng(seed);
  Environment out = env;
  out.tasks.clear();
  std::size_t dropped = 0;
  for (const Task& task : env.tasks) {
    if (task.train.size() < common_size) {
      ++dropped;
      continue;
    }
    Task kept = task;
    if (policy == TruncatePolicy::DropShort) {
      kept.train.assign(task.train.begin(),
                        task.train.begin() + static_cast<std::ptrdiff_t>(common_size));
    } else {
      kept.train.clear();
      std::sample(task.train.begin(), task.train.end(), std::back_inserter(kept.train),
                  common_size, rng);
    }
    out.tasks.push_back(std::move(kept));
  }
  if (out.tasks.empty()) {
    throw InvalidParameter("truncate_tasks: no task has >= " + std::to_string(common_size) +
                           " training points");
  }
  out.train_size = common_size;
  out.provenance = env.provenance;
  out.provenance["truncation"] = {
      {"common_size", common_size},
      {"policy", policy == TruncatePolicy::DropShort ? "drop_short" : "subsample"},
      {"seed", seed},
      {"dropped_tasks", dropped}};
  return out;
}

}  // namespace pfmtl
