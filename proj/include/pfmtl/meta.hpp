#pragma once

#include <string>

#include "pfmtl/within_task.hpp"

namespace pfmtl {

// How the bias fed to the within-task learner evolves across tasks.
//   Aggressive: bias recomputed from the meta state at every point.
//   Lazy: bias frozen per task, meta state updated once per task from the
//     summed gradient.
//   Itl: bias identically zero, each task learned in isolation.
//   FixedBias: a constant bias supplied up front.
enum class Variant { Aggressive, Lazy, Itl, FixedBias };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// One processed example as seen from the meta level.
struct MetaStep {
  std::size_t task = 0;    // t, 1-based
  std::size_t index = 0;   // i within the task, 1-based
  std::size_t global = 0;  // k = (t-1) * n + i for the fixed-size variants
  WithinStep inner;
  Vec bias;             // bias in force at this step
  double meta_gv = 0.0;  // <g, V> fed to the meta bettor (aggressive only)
  double meta_p = 0.0;   // meta magnitude in force at this step
};

// Emitted by end_task().
struct TaskClose {
  std::size_t task = 0;  // the task just closed
  Vec next_bias;         // bias the next task will start from
  Vec grad_sum;          // sum of this task's gradients
  double meta_gv = 0.0;  // <grad_sum, V> fed to the meta bettor (lazy only)
  double meta_p = 0.0;   // meta magnitude in force for this task (lazy only)
};

// Streams tasks of examples through a within-task learner while learning the
// bias to hand the next task (or the next point, for the aggressive variant).
// The meta level reuses the same two primitives as the within-task level: a
// scalar bettor for |bias| and a unit-ball direction learner for bias/|bias|.
class MetaLearner {
 public:
  // inner_wealth seeds each task's magnitude bettor, meta_wealth the bias
  // magnitude bettor. task_size is enforced: every task must contain exactly
  // that many examples.
  static MetaLearner aggressive(double inner_wealth, double meta_wealth, double lipschitz,
                                double input_bound, std::size_t task_size, std::size_t dim);
  static MetaLearner lazy(double inner_wealth, double meta_wealth, double lipschitz,
                          double input_bound, std::size_t task_size, std::size_t dim);
  // The isolated and fixed-bias variants accept tasks of any length.
  static MetaLearner itl(double inner_wealth, double lipschitz, double input_bound,
                         std::size_t dim);
  static MetaLearner fixed_bias(Vec bias, double inner_wealth, double lipschitz,
                                double input_bound);

  MetaStep observe(const Vec& x, double y, const LossSpec& loss);
  TaskClose end_task();

  Variant variant() const { return variant_; }
  // Bias that the next observed point will be predicted with.
  Vec current_bias() const;
  const WithinTaskLearner& inner() const { return inner_; }
  const BetState& meta_magnitude_state() const { return meta_magnitude_; }
  const DirectionState& meta_direction_state() const { return meta_direction_; }
  std::size_t task() const { return task_; }
  std::size_t points_in_task() const { return points_; }
  std::size_t global_step() const { return global_; }
  std::size_t task_size() const { return task_size_; }
  std::size_t dim() const { return inner_.dim(); }

 private:
  MetaLearner(Variant variant, Vec fixed, double inner_wealth, double meta_wealth,
              double lipschitz, double input_bound, std::size_t task_size, std::size_t dim,
              double meta_scale);

  Variant variant_;
  Vec fixed_bias_;
  WithinTaskLearner inner_;
  BetState meta_magnitude_;
  DirectionState meta_direction_;
  Vec grad_sum_;
  std::size_t task_size_;  // 0 when task length is unconstrained
  std::size_t task_ = 1;
  std::size_t points_ = 0;
  std::size_t global_ = 1;
};

}  // namespace pfmtl
