#include "pfmtl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pfmtl {

namespace {

constexpr double kTwoSqrtTwo = 2.0 * 1.4142135623730951;

void check_close(double a, double b, double tol_scale, const std::string& what) {
  const double tol = 1e-12 * std::max(1.0, tol_scale);
  if (std::abs(a - b) > tol) {
    throw ProtocolError("ledger: " + what + " mismatch (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
  }
}

void check_comparators(const std::vector<Vec>& comparators, const RunLedger& ledger) {
  if (comparators.size() != ledger.tasks.size()) {
    throw DimensionMismatch("expected " + std::to_string(ledger.tasks.size()) +
                            " comparators, got " + std::to_string(comparators.size()));
  }
  if (!ledger.steps.empty()) {
    for (const Vec& w : comparators) {
      if (w.size() != ledger.steps.front().iterate.size()) {
        throw DimensionMismatch("comparator dim does not match run dim");
      }
    }
  }
}

double mean_test_loss(const Vec& w, const std::vector<DataPoint>& test, const LossSpec& loss) {
  double sum = 0.0;
  for (const DataPoint& p : test) sum += loss.value(dot(p.x, w), p.y);
  return sum / static_cast<double>(test.size());
}

double sample_std_error(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace

void RunLedger::validate() const {
  if (steps.empty() || tasks.empty()) throw ProtocolError("ledger: empty run");
  std::size_t step_at = 0;
  std::size_t expected_global = 1;
  const bool uniform = std::all_of(tasks.begin(), tasks.end(), [&](const TaskEntry& te) {
    return te.train_count == tasks.front().train_count;
  });
  const std::size_t n = tasks.front().train_count;
  for (std::size_t tt = 0; tt < tasks.size(); ++tt) {
    const TaskEntry& te = tasks[tt];
    if (te.task != tt + 1) throw ProtocolError("ledger: task numbering broken");
    if (te.train_count == 0) throw ProtocolError("ledger: empty task entry");
    Vec iter_sum = zeros(te.avg_iterate.size());
    Vec grad_sum = zeros(te.grad_sum.size());
    double loss_sum = 0.0;
    for (std::size_t i = 1; i <= te.train_count; ++i, ++step_at) {
      if (step_at >= steps.size()) throw ProtocolError("ledger: fewer steps than task counts");
      const StepEntry& st = steps[step_at];
      if (st.task != te.task || st.index != i) throw ProtocolError("ledger: step ordering broken");
      if (st.global != expected_global++) throw ProtocolError("ledger: global counter broken");
      if (uniform && st.global != (st.task - 1) * n + st.index) {
        throw ProtocolError("ledger: global counter does not match task clock");
      }
      if (st.loss < 0.0) throw ProtocolError("ledger: negative loss");
      check_close(st.linear_term, dot(st.gradient, st.iterate), std::abs(st.linear_term),
                  "linear term");
      const double pred_scale = std::abs(st.prediction) + norm(st.x) * norm(st.iterate);
      if (std::abs(st.prediction - dot(st.x, st.iterate)) > 1e-9 * std::max(1.0, pred_scale)) {
        throw ProtocolError("ledger: prediction does not match iterate");
      }
      add_scaled(iter_sum, 1.0, st.iterate);
      add_scaled(grad_sum, 1.0, st.gradient);
      loss_sum += st.loss;
      if (i == 1) {
        for (std::size_t j = 0; j < st.bias.size(); ++j) {
          check_close(st.bias[j], te.start_bias[j], std::abs(st.bias[j]), "start bias");
        }
      }
    }
    check_close(loss_sum, te.cumulative_loss, loss_sum, "cumulative loss");
    for (std::size_t j = 0; j < iter_sum.size(); ++j) {
      check_close(iter_sum[j] / static_cast<double>(te.train_count), te.avg_iterate[j],
                  std::abs(te.avg_iterate[j]), "average iterate");
      check_close(grad_sum[j], te.grad_sum[j], std::abs(te.grad_sum[j]), "gradient sum");
    }
  }
  if (step_at != steps.size()) throw ProtocolError("ledger: more steps than task counts");
}

RunLedger run_learner(MetaLearner& learner, const Environment& env, const LossSpec& loss) {
  if (learner.task() != 1 || learner.points_in_task() != 0 || learner.global_step() != 1) {
    throw ProtocolError("run_learner: learner has already been stepped");
  }
  if (env.dim != learner.dim()) {
    throw DimensionMismatch("run_learner: environment dim " + std::to_string(env.dim) +
                            " vs learner dim " + std::to_string(learner.dim()));
  }
  if (env.tasks.empty()) throw InvalidParameter("run_learner: environment has no tasks");

  RunLedger ledger;
  ledger.variant = learner.variant();
  ledger.inner_wealth = learner.inner().initial_wealth();
  ledger.meta_wealth = learner.meta_magnitude_state().initial_wealth();
  ledger.lipschitz = learner.inner().lipschitz();
  ledger.input_bound = learner.inner().input_bound();

  for (const Task& task : env.tasks) {
    if (task.train.empty()) {
      throw InvalidParameter("run_learner: task \"" + task.id + "\" has no training points");
    }
    TaskEntry te;
    te.task = learner.task();
    te.id = task.id;
    te.train_count = task.train.size();
    Vec iter_sum = zeros(env.dim);
    for (const DataPoint& point : task.train) {
      MetaStep ms = learner.observe(point.x, point.y, loss);
      StepEntry st;
      st.task = ms.task;
      st.index = ms.index;
      st.global = ms.global;
      st.x = point.x;
      st.y = point.y;
      st.prediction = ms.inner.prediction;
      st.loss = ms.inner.loss;
      st.inner_gv = ms.inner.gv;
      st.inner_p = ms.inner.magnitude;
      st.meta_gv = ms.meta_gv;
      st.meta_p = ms.meta_p;
      st.linear_term = dot(ms.inner.gradient, ms.inner.iterate);
      add_scaled(iter_sum, 1.0, ms.inner.iterate);
      if (ms.index == 1) te.start_bias = ms.bias;
      te.cumulative_loss += ms.inner.loss;
      st.gradient = std::move(ms.inner.gradient);
      st.iterate = std::move(ms.inner.iterate);
      st.bias = std::move(ms.bias);
      ledger.steps.push_back(std::move(st));
    }
    TaskClose close = learner.end_task();
    te.grad_sum = std::move(close.grad_sum);
    te.meta_gv = close.meta_gv;
    te.meta_p = close.meta_p;
    te.avg_iterate = scaled(iter_sum, 1.0 / static_cast<double>(te.train_count));
    ledger.tasks.push_back(std::move(te));
  }
  return ledger;
}

std::vector<Vec> collect_biases(Variant variant, const RunLedger& ledger) {
  std::vector<Vec> biases;
  if (variant == Variant::Aggressive) {
    biases.reserve(ledger.steps.size());
    for (const StepEntry& st : ledger.steps) biases.push_back(st.bias);
  } else {
    biases.reserve(ledger.tasks.size());
    for (const TaskEntry& te : ledger.tasks) biases.push_back(te.start_bias);
  }
  return biases;
}

double linear_regret(const RunLedger& ledger, const std::vector<Vec>& comparators) {
  check_comparators(comparators, ledger);
  double total = 0.0;
  for (const StepEntry& st : ledger.steps) {
    total += st.linear_term - dot(st.gradient, comparators[st.task - 1]);
  }
  return total;
}

RegretPair regret(const RunLedger& ledger, const std::vector<Vec>& comparators,
                  const LossSpec& loss) {
  check_comparators(comparators, ledger);
  RegretPair out;
  for (const StepEntry& st : ledger.steps) {
    const Vec& w = comparators[st.task - 1];
    out.loss += st.loss - loss.value(dot(st.x, w), st.y);
    out.linear += st.linear_term - dot(st.gradient, w);
  }
  return out;
}

VarTerms var_terms(const std::vector<Vec>& comparators, const Vec& theta, double inner_wealth,
                   std::size_t train_size) {
  if (comparators.empty()) throw InvalidParameter("var_terms: no comparators");
  if (!(inner_wealth > 0.0)) throw InvalidParameter("var_terms: wealth must be > 0");
  if (train_size == 0) throw InvalidParameter("var_terms: train_size must be >= 1");
  VarTerms out;
  const double n = static_cast<double>(train_size);
  for (const Vec& w : comparators) {
    const double d = distance(w, theta);
    out.var += d;
    out.var_hat += phi(d * n / inner_wealth) * d;
  }
  out.var /= static_cast<double>(comparators.size());
  out.var_hat /= static_cast<double>(comparators.size());
  return out;
}

namespace {

void check_bound_inputs(const BoundInputs& in) {
  if (in.task_count == 0 || in.train_size == 0) {
    throw InvalidParameter("bound: task_count and train_size must be >= 1");
  }
  if (in.comparators.size() != in.task_count) {
    throw DimensionMismatch("bound: expected " + std::to_string(in.task_count) +
                            " comparators, got " + std::to_string(in.comparators.size()));
  }
  if (!(in.inner_wealth > 0.0) || !(in.meta_wealth > 0.0) || !(in.lipschitz > 0.0) ||
      !(in.input_bound > 0.0)) {
    throw InvalidParameter("bound: wealths and scales must be > 0");
  }
  for (const Vec& w : in.comparators) {
    if (w.size() != in.theta.size()) {
      throw DimensionMismatch("bound: comparator dim does not match theta dim");
    }
  }
}

}  // namespace

double bound_fixed_bias(const BoundInputs& in) {
  check_bound_inputs(in);
  const VarTerms vt = var_terms(in.comparators, in.theta, in.inner_wealth, in.train_size);
  const double n = static_cast<double>(in.train_size);
  const double T = static_cast<double>(in.task_count);
  return in.lipschitz * in.input_bound *
         (in.inner_wealth * T + (kTwoSqrtTwo * vt.var + vt.var_hat) * std::sqrt(n) * T);
}

double bound_meta(const BoundInputs& in, Variant variant) {
  const double within = bound_fixed_bias(in);
  const double scale = in.lipschitz * in.input_bound;
  const double n = static_cast<double>(in.train_size);
  const double T = static_cast<double>(in.task_count);
  const double P = norm(in.theta);
  double meta = 0.0;
  if (variant == Variant::Aggressive) {
    const double K = n * T;
    meta = scale *
           (in.meta_wealth + (kTwoSqrtTwo + phi(P * K / in.meta_wealth)) * P * std::sqrt(K));
  } else if (variant == Variant::Lazy) {
    meta = scale * (in.meta_wealth * n +
                    (kTwoSqrtTwo + phi(P * T / in.meta_wealth)) * P * n * std::sqrt(T));
  } else {
    throw InvalidParameter("bound_meta: variant must be aggressive or lazy");
  }
  return within + meta;
}

Decomposition regret_decomposition(const RunLedger& ledger, const std::vector<Vec>& comparators,
                                   const Vec& theta) {
  check_comparators(comparators, ledger);
  const std::size_t dim = theta.size();
  const double P = norm(theta);
  const Vec V = P > 0.0 ? scaled(theta, 1.0 / P) : zeros(dim);

  Decomposition out;
  std::size_t step_at = 0;
  double meta_gv_sum = 0.0;
  Vec grad_total = zeros(dim);
  for (std::size_t tt = 0; tt < ledger.tasks.size(); ++tt) {
    const TaskEntry& te = ledger.tasks[tt];
    const Vec& w = comparators[tt];
    const double p = distance(w, theta);
    Vec v = zeros(dim);
    if (p > 0.0) {
      v = w;
      add_scaled(v, -1.0, theta);
      for (double& c : v) c /= p;
    }
    double gv_sum = 0.0;
    for (std::size_t i = 0; i < te.train_count; ++i, ++step_at) {
      const StepEntry& st = ledger.steps[step_at];
      out.within_magnitude += st.inner_gv * (st.inner_p - p);
      gv_sum += st.inner_gv;
      if (ledger.variant == Variant::Aggressive) {
        out.meta_magnitude += st.meta_gv * (st.meta_p - P);
        meta_gv_sum += st.meta_gv;
      }
    }
    out.within_direction += p * (gv_sum - dot(te.grad_sum, v));
    if (ledger.variant == Variant::Lazy) {
      out.meta_magnitude += te.meta_gv * (te.meta_p - P);
      meta_gv_sum += te.meta_gv;
    }
    add_scaled(grad_total, 1.0, te.grad_sum);
  }
  if (ledger.variant == Variant::Aggressive || ledger.variant == Variant::Lazy) {
    out.meta_direction = P * (meta_gv_sum - dot(grad_total, V));
  } else {
    // Constant bias: the meta share is a plain inner product.
    for (const TaskEntry& te : ledger.tasks) {
      out.meta_direction += dot(te.grad_sum, te.start_bias) - dot(te.grad_sum, theta);
    }
  }
  return out;
}

Vec oracle_bias(const std::vector<Vec>& comparators) {
  if (comparators.empty()) throw InvalidParameter("oracle_bias: no comparators");
  Vec mean = zeros(comparators.front().size());
  for (const Vec& w : comparators) add_scaled(mean, 1.0, w);
  for (double& c : mean) c /= static_cast<double>(comparators.size());
  return mean;
}

double mtl_risk(const RunLedger& ledger, const Environment& env, const LossSpec& loss) {
  if (env.tasks.size() != ledger.tasks.size()) {
    throw DimensionMismatch("mtl_risk: ledger has " + std::to_string(ledger.tasks.size()) +
                            " tasks, environment has " + std::to_string(env.tasks.size()));
  }
  double sum = 0.0;
  for (std::size_t tt = 0; tt < env.tasks.size(); ++tt) {
    if (env.tasks[tt].test.empty()) {
      throw InvalidParameter("mtl_risk: task \"" + env.tasks[tt].id + "\" has no test points");
    }
    sum += mean_test_loss(ledger.tasks[tt].avg_iterate, env.tasks[tt].test, loss);
  }
  return sum / static_cast<double>(env.tasks.size());
}

double target_oracle_risk(const Environment& env, const LossSpec& loss) {
  if (env.tasks.empty()) throw InvalidParameter("target_oracle_risk: no tasks");
  double sum = 0.0;
  for (const Task& task : env.tasks) {
    if (!task.target) {
      throw InvalidParameter("target_oracle_risk: task \"" + task.id + "\" has no target");
    }
    if (task.test.empty()) {
      throw InvalidParameter("target_oracle_risk: task \"" + task.id + "\" has no test points");
    }
    sum += mean_test_loss(*task.target, task.test, loss);
  }
  return sum / static_cast<double>(env.tasks.size());
}

Vec lad_fit(const std::vector<DataPoint>& points, const LossSpec& loss, std::size_t iterations) {
  if (points.empty()) throw InvalidParameter("lad_fit: no points");
  if (iterations == 0) throw InvalidParameter("lad_fit: iterations must be >= 1");
  const std::size_t dim = points.front().x.size();
  double max_y = 0.0;
  double max_x = 0.0;
  for (const DataPoint& p : points) {
    if (p.x.size() != dim) throw DimensionMismatch("lad_fit: inconsistent input dims");
    max_y = std::max(max_y, std::abs(p.y));
    max_x = std::max(max_x, norm(p.x));
  }
  Vec w = zeros(dim);
  if (max_x == 0.0) return w;

  const double m = static_cast<double>(points.size());
  auto objective = [&](const Vec& u) {
    double sum = 0.0;
    for (const DataPoint& p : points) sum += loss.value(dot(p.x, u), p.y);
    return sum / m;
  };
  const double eta0 = (max_y > 0.0 ? max_y : 1.0) / (loss.lipschitz * max_x);
  Vec best = w;
  double best_obj = objective(w);
  for (std::size_t j = 1; j <= iterations; ++j) {
    Vec g = zeros(dim);
    for (const DataPoint& p : points) {
      const double s = loss.subgradient(dot(p.x, w), p.y);
      add_scaled(g, s / m, p.x);
    }
    add_scaled(w, -eta0 / std::sqrt(static_cast<double>(j)), g);
    const double obj = objective(w);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

TransferEstimate meta_transfer_estimate(const std::vector<Vec>& biases, const Environment& env,
                                        const LossSpec& loss, double inner_wealth,
                                        std::uint64_t seed, std::size_t samples) {
  if (biases.empty()) throw InvalidParameter("meta_transfer_estimate: no biases");
  if (env.tasks.empty()) throw InvalidParameter("meta_transfer_estimate: no tasks");
  if (samples == 0) throw InvalidParameter("meta_transfer_estimate: samples must be >= 1");
  for (const Vec& b : biases) {
    if (b.size() != env.dim) {
      throw DimensionMismatch("meta_transfer_estimate: bias dim does not match environment");
    }
  }
  for (const Task& task : env.tasks) {
    if (task.train.empty() || task.test.empty()) {
      throw InvalidParameter("meta_transfer_estimate: task \"" + task.id +
                             "\" needs train and test points");
    }
  }
  // Task draws get their own stream so two calls with the same seed visit the
  // same tasks regardless of how many biases each call has to pick from.
  std::mt19937_64 task_rng(seed);
  std::mt19937_64 bias_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> task_pick(0, env.tasks.size() - 1);
  std::uniform_int_distribution<std::size_t> bias_pick(0, biases.size() - 1);

  TransferEstimate out;
  out.samples = samples;
  out.values.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const Task& task = env.tasks[task_pick(task_rng)];
    const Vec& bias = biases[bias_pick(bias_rng)];
    WithinTaskLearner learner(bias, inner_wealth, loss.lipschitz, env.input_bound);
    Vec iter_sum = zeros(env.dim);
    for (const DataPoint& point : task.train) {
      const WithinStep st = learner.observe(point.x, point.y, loss);
      add_scaled(iter_sum, 1.0, st.iterate);
    }
    const Vec avg = scaled(iter_sum, 1.0 / static_cast<double>(task.train.size()));
    out.values.push_back(mean_test_loss(avg, task.test, loss));
  }
  double sum = 0.0;
  for (double v : out.values) sum += v;
  out.mean = sum / static_cast<double>(samples);
  out.std_error = sample_std_error(out.values, out.mean);
  return out;
}

ConversionReport online_to_batch_check(const std::vector<SeedRun>& runs, const LossSpec& loss) {
  if (runs.empty()) throw InvalidParameter("online_to_batch_check: no runs");
  ConversionReport report;
  report.seeds = runs.size();
  std::vector<double> margins;
  margins.reserve(runs.size());
  for (const SeedRun& run : runs) {
    if (run.ledger == nullptr || run.env == nullptr) {
      throw InvalidParameter("online_to_batch_check: null run");
    }
    std::vector<Vec> targets;
    targets.reserve(run.env->tasks.size());
    for (const Task& task : run.env->tasks) {
      if (!task.target) {
        throw InvalidParameter("online_to_batch_check: task \"" + task.id + "\" has no target");
      }
      targets.push_back(*task.target);
    }
    const double rate = regret(*run.ledger, targets, loss).loss /
                        static_cast<double>(run.ledger->steps.size());
    const double excess = mtl_risk(*run.ledger, *run.env, loss) - target_oracle_risk(*run.env, loss);
    report.mean_excess += excess;
    report.mean_regret_rate += rate;
    margins.push_back(rate - excess);
  }
  const double s = static_cast<double>(runs.size());
  report.mean_excess /= s;
  report.mean_regret_rate /= s;
  report.margin = report.mean_regret_rate - report.mean_excess;
  report.std_error = sample_std_error(margins, report.margin);
  report.holds = report.margin >= -3.0 * report.std_error;
  return report;
}

}  // namespace pfmtl
