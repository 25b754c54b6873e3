#pragma once

#include <cstdint>

#include "pfmtl/environments.hpp"
#include "pfmtl/meta.hpp"

namespace pfmtl {

// Full record of one processed training point, sufficient to replay every
// regret stream against arbitrary comparators after the fact.
struct StepEntry {
  std::size_t task = 0;    // t, 1-based
  std::size_t index = 0;   // i within the task
  std::size_t global = 0;  // k over the whole run
  Vec x;
  double y = 0.0;
  double prediction = 0.0;
  double loss = 0.0;
  double linear_term = 0.0;  // <gradient, iterate>
  double inner_gv = 0.0;     // <gradient, inner direction> before the update
  double inner_p = 0.0;      // inner magnitude in force
  double meta_gv = 0.0;      // aggressive meta bettor feed
  double meta_p = 0.0;       // aggressive meta magnitude in force
  Vec gradient;
  Vec iterate;
  Vec bias;
};

// Per-task aggregates written when the task closes.
struct TaskEntry {
  std::size_t task = 0;
  std::string id;
  std::size_t train_count = 0;
  Vec start_bias;    // bias in force at the task's first point
  Vec avg_iterate;   // mean of the task's played iterates
  Vec grad_sum;      // sum of the task's gradients
  double meta_gv = 0.0;  // lazy meta bettor feed for this task
  double meta_p = 0.0;   // lazy meta magnitude in force for this task
  double cumulative_loss = 0.0;
};

// Everything a run produced, plus the constants it ran at.
struct RunLedger {
  Variant variant = Variant::Itl;
  double inner_wealth = 1.0;
  double meta_wealth = 1.0;
  double lipschitz = 1.0;
  double input_bound = 1.0;
  std::vector<StepEntry> steps;
  std::vector<TaskEntry> tasks;

  // Cross-checks the internal bookkeeping (counters, sums, averages,
  // recomputed inner products). Throws ProtocolError on the first breach.
  void validate() const;
};

// Streams every task's training points through the learner, closing tasks as
// it goes. The learner must be freshly constructed.
RunLedger run_learner(MetaLearner& learner, const Environment& env, const LossSpec& loss);

// The bias trajectory a run followed: one entry per point for the aggressive
// variant, one per task for the others.
std::vector<Vec> collect_biases(Variant variant, const RunLedger& ledger);

// Sum over steps of <gradient, iterate - comparator of the step's task>.
// Comparators are indexed by task, one per closed task.
double linear_regret(const RunLedger& ledger, const std::vector<Vec>& comparators);

struct RegretPair {
  double loss = 0.0;    // cumulative loss minus comparator loss
  double linear = 0.0;  // linearized version; upper-bounds loss by convexity
};
RegretPair regret(const RunLedger& ledger, const std::vector<Vec>& comparators,
                  const LossSpec& loss);

// Mean distance of the comparators from theta, and the same mean with each
// distance weighted by the slow-growth factor phi(distance * n / wealth).
struct VarTerms {
  double var = 0.0;
  double var_hat = 0.0;
};
VarTerms var_terms(const std::vector<Vec>& comparators, const Vec& theta, double inner_wealth,
                   std::size_t train_size);

struct BoundInputs {
  double inner_wealth = 1.0;
  double meta_wealth = 1.0;
  double lipschitz = 1.0;
  double input_bound = 1.0;
  std::size_t train_size = 0;
  std::size_t task_count = 0;
  std::vector<Vec> comparators;  // one per task
  Vec theta;
};

// Guarantee on the summed within-task linear regret when every task is run
// against the fixed bias theta:
//   R L (e T + (2 sqrt(2) var + var_hat) sqrt(n) T).
double bound_fixed_bias(const BoundInputs& in);

// Same within-task share with theta now a comparator of the meta level, plus
// the meta level's own regret for reaching theta. The aggressive variant pays
// its meta share on the point clock, the lazy variant on the task clock.
double bound_meta(const BoundInputs& in, Variant variant);

// Exact split of the linear regret into the four learner shares: the two
// within-task primitives (betting the magnitude |w_t - theta|, steering the
// direction) and the two meta primitives (betting |theta|, steering theta).
// Sums to linear_regret for every theta; for the constant-bias variants the
// meta share collapses to <sum of gradients, bias - theta>, reported under
// meta_direction.
struct Decomposition {
  double within_magnitude = 0.0;
  double within_direction = 0.0;
  double meta_magnitude = 0.0;
  double meta_direction = 0.0;

  double total() const {
    return within_magnitude + within_direction + meta_magnitude + meta_direction;
  }
};
Decomposition regret_decomposition(const RunLedger& ledger, const std::vector<Vec>& comparators,
                                   const Vec& theta);

// Mean of the comparators, the bias an oracle with all tasks in hand would
// pick.
Vec oracle_bias(const std::vector<Vec>& comparators);

// Mean over tasks of the test loss of that task's average iterate.
double mtl_risk(const RunLedger& ledger, const Environment& env, const LossSpec& loss);

// Mean over tasks of the test loss of the task's own target vector.
double target_oracle_risk(const Environment& env, const LossSpec& loss);

// Best-objective iterate of subgradient descent on the mean absolute-style
// loss over one task's points. Offline stand-in for the task's target when
// none is known.
Vec lad_fit(const std::vector<DataPoint>& points, const LossSpec& loss, std::size_t iterations);

// Monte-Carlo estimate of how a frozen bias trajectory transfers: each sample
// draws a task and a bias uniformly, trains a fresh within-task learner with
// that bias on the task's training points and scores the average iterate on
// the task's test points. The task draws depend only on (seed, samples), so
// two calls with different bias lists are paired sample by sample.
struct TransferEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::vector<double> values;
};
TransferEstimate meta_transfer_estimate(const std::vector<Vec>& biases, const Environment& env,
                                        const LossSpec& loss, double inner_wealth,
                                        std::uint64_t seed, std::size_t samples);

// One independently generated run for the conversion check below.
struct SeedRun {
  const RunLedger* ledger = nullptr;
  const Environment* env = nullptr;
};

// Checks the online-to-batch direction: mean excess risk of the task-average
// iterates over the targets' own risk should not exceed the mean per-point
// regret against the targets, up to Monte-Carlo error.
struct ConversionReport {
  double mean_excess = 0.0;
  double mean_regret_rate = 0.0;
  double margin = 0.0;     // mean_regret_rate - mean_excess
  double std_error = 0.0;  // of the per-seed margins
  std::size_t seeds = 0;
  bool holds = false;  // margin >= -3 std errors
};
ConversionReport online_to_batch_check(const std::vector<SeedRun>& runs, const LossSpec& loss);

}  // namespace pfmtl
