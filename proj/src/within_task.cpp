#include "pfmtl/within_task.hpp"

namespace pfmtl {

WithinTaskLearner::WithinTaskLearner(Vec bias, double initial_wealth, double lipschitz,
                                     double input_bound)
    : bias_(std::move(bias)),
      initial_wealth_(initial_wealth),
      lipschitz_(lipschitz),
      input_bound_{input_bound},
      magnitude_(initial_wealth, lipschitz * input_bound),
      direction_(unit_ball(bias_.size()), lipschitz * input_bound) {
  if (!(lipschitz > 0.0)) throw InvalidParameter("WithinTaskLearner: lipschitz must be > 0");
  if (!(input_bound > 0.0)) throw InvalidParameter("WithinTaskLearner: input bound must be > 0");
}

double WithinTaskLearner::predict(const Vec& x) const {
  if (x.size() != dim()) {
    throw DimensionMismatch("predict: input dim " + std::to_string(x.size()) + " vs learner dim " +
                            std::to_string(dim()));
  }
  return dot(x, bias_) + magnitude_.bet() * dot(x, direction_.iterate());
}

WithinStep WithinTaskLearner::evaluate(const Vec& x, double y, const LossSpec& loss) const {
  input_bound_.check(x);
  WithinStep step;
  step.index = index_;
  step.prediction = predict(x);
  step.loss = loss.value(step.prediction, y);
  step.magnitude = magnitude_.bet();
  const double s = loss.subgradient(step.prediction, y);
  step.gradient = scaled(x, s);
  step.gv = s * dot(x, direction_.iterate());
  step.iterate = iterate();
  return step;
}

void WithinTaskLearner::absorb(const WithinStep& step) {
  if (step.index != index_) {
    throw ProtocolError("absorb: step " + std::to_string(step.index) + " does not match index " +
                        std::to_string(index_));
  }
  direction_.step(step.gradient);
  magnitude_.step(step.gv);
  ++index_;
}

WithinStep WithinTaskLearner::observe(const Vec& x, double y, const LossSpec& loss) {
  WithinStep step = evaluate(x, y, loss);
  absorb(step);
  return step;
}

void WithinTaskLearner::reset(Vec bias) {
  if (bias.size() != dim()) {
    throw DimensionMismatch("reset: bias dim " + std::to_string(bias.size()) + " vs learner dim " +
                            std::to_string(dim()));
  }
  bias_ = std::move(bias);
  magnitude_ = BetState(initial_wealth_, lipschitz_ * input_bound_.radius);
  direction_ = DirectionState(unit_ball(dim()), lipschitz_ * input_bound_.radius);
  index_ = 1;
}

void WithinTaskLearner::set_bias(Vec bias) {
  if (bias.size() != dim()) {
    throw DimensionMismatch("set_bias: bias dim " + std::to_string(bias.size()) +
                            " vs learner dim " + std::to_string(dim()));
  }
  bias_ = std::move(bias);
}

Vec WithinTaskLearner::iterate() const {
  Vec w(bias_);
  add_scaled(w, magnitude_.bet(), direction_.iterate());
  return w;
}

namespace {

std::vector<Vec> ogd_core(Vec w, const Vec* bias, double step_size,
                          const std::vector<DataPoint>& data, const LossSpec& loss) {
  if (!(step_size > 0.0)) throw InvalidParameter("ogd: step size must be > 0");
  std::vector<Vec> iterates;
  iterates.reserve(data.size() + 1);
  iterates.push_back(w);
  for (const DataPoint& point : data) {
    const Vec g = full_subgradient(loss, point.x, point.y, w);
    add_scaled(w, -step_size, g);
    if (bias != nullptr) add_scaled(w, 1.0, *bias);
    iterates.push_back(w);
  }
  return iterates;
}

}  // namespace

std::vector<Vec> translated_ogd_run(const Vec& bias, double step_size,
                                    const std::vector<DataPoint>& data, const LossSpec& loss) {
  return ogd_core(zeros(bias.size()), &bias, step_size, data, loss);
}

std::vector<Vec> ogd_run_from(const Vec& start, double step_size,
                              const std::vector<DataPoint>& data, const LossSpec& loss) {
  return ogd_core(start, nullptr, step_size, data, loss);
}

}  // namespace pfmtl
