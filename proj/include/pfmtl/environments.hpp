#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pfmtl/core.hpp"

namespace pfmtl {

struct Task {
  std::string id;
  std::vector<DataPoint> train;
  std::vector<DataPoint> test;
  // Ground-truth weight vector when the task was sampled from a known model.
  std::optional<Vec> target;
};

struct Environment {
  std::vector<Task> tasks;
  std::size_t dim = 0;
  double input_bound = 1.0;
  // Common per-task training size; 0 when tasks differ in length.
  std::size_t train_size = 0;
  // How this environment came to be (generator parameters, file path, splits).
  nlohmann::json provenance;

  std::size_t task_count() const { return tasks.size(); }
};

// Regression tasks whose weight vectors are scattered around a common center:
// w_t = theta_star + task_std * z, z standard normal. Inputs are uniform on
// the unit sphere and labels are <x, w_t> plus Gaussian noise with standard
// deviation |w_t| / sqrt(dim), which puts the noise power at the signal power.
// Each task gets train_size training points and enough test points to make
// the test share approximately test_fraction of the task.
Environment gen_synthetic(std::uint64_t seed, std::size_t task_count, std::size_t train_size,
                          std::size_t dim, const Vec& theta_star, double task_std,
                          double test_fraction);

// Column names for the long-format CSV layout: one row per example, one
// column naming the task it belongs to.
struct CsvSchema {
  std::string task_column;
  std::vector<std::string> feature_columns;
  std::string label_column;
};

// Loads every row into the training side of its task; tasks appear in order
// of first occurrence. With no declared bound the input bound is measured
// from the data; with one, rows exceeding it are an error. Parse errors
// report 1-based row numbers (the header is row 1).
Environment load_csv(const std::string& path, const CsvSchema& schema,
                     std::optional<double> declared_input_bound = std::nullopt);

// Re-splits each task: its train and test points are pooled, shuffled and cut
// at floor(train_fraction * size), keeping at least one training point.
// Fraction 1 keeps the pool order and leaves the test side empty.
Environment split_train_test(const Environment& env, double train_fraction, std::uint64_t seed);

// How truncate_tasks reaches a common training size: keep the first
// common_size points, or sample common_size of them without replacement.
// Either way, tasks with fewer training points are dropped.
enum class TruncatePolicy { DropShort, Subsample };

Environment truncate_tasks(const Environment& env, std::size_t common_size, TruncatePolicy policy,
                           std::uint64_t seed = 0);

}  // namespace pfmtl
