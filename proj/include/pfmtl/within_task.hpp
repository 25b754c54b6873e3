#pragma once

#include "pfmtl/core.hpp"
#include "pfmtl/losses.hpp"

namespace pfmtl {

// Everything produced while processing one example: the played iterate and
// prediction, the loss, the full gradient g = s * x, and the scalar g_v fed
// to the magnitude bettor.
struct WithinStep {
  std::size_t index = 0;  // 1-based position within the task
  double prediction = 0.0;
  double loss = 0.0;
  double magnitude = 0.0;  // p_i in force when predicting
  double gv = 0.0;         // <g, v_i> with the pre-update direction
  Vec gradient;
  Vec iterate;  // p_i * v_i + bias
};

// Within-task learner. The iterate is kept factored as magnitude * direction
// + bias: a scalar bettor learns how far to move from the bias, a projected
// subgradient scheme over the unit ball learns which way. Predictions are
// computed as <x, bias> + p * <x, v>, never through the materialized iterate,
// so translating the bias translates every prediction exactly.
class WithinTaskLearner {
 public:
  // initial_wealth seeds the magnitude bettor; lipschitz and input_bound
  // determine the gradient scale L * R both primitives are run at.
  WithinTaskLearner(Vec bias, double initial_wealth, double lipschitz, double input_bound);

  double predict(const Vec& x) const;

  // Compute prediction, loss, gradient and the bettor feed without mutating
  // any state. absorb() then applies the direction and magnitude updates.
  WithinStep evaluate(const Vec& x, double y, const LossSpec& loss) const;
  void absorb(const WithinStep& step);
  WithinStep observe(const Vec& x, double y, const LossSpec& loss);

  // Fresh task: same wealth and scale, direction back at 0, new bias.
  void reset(Vec bias);
  // Replace the bias without touching the betting or direction state.
  void set_bias(Vec bias);

  Vec iterate() const;
  const Vec& bias() const { return bias_; }
  double magnitude() const { return magnitude_.bet(); }
  const Vec& direction() const { return direction_.iterate(); }
  const BetState& magnitude_state() const { return magnitude_; }
  const DirectionState& direction_state() const { return direction_; }
  std::size_t index() const { return index_; }
  std::size_t dim() const { return bias_.size(); }
  double lipschitz() const { return lipschitz_; }
  double input_bound() const { return input_bound_.radius; }
  double initial_wealth() const { return initial_wealth_; }

 private:
  Vec bias_;
  double initial_wealth_;
  double lipschitz_;
  InputBound input_bound_;
  BetState magnitude_;
  DirectionState direction_;
  std::size_t index_ = 1;
};

// Gradient descent recentered every step: w_1 = 0 and
// w_{i+1} = w_i - step_size * g_i + bias. Returns w_1 .. w_{n+1}.
std::vector<Vec> translated_ogd_run(const Vec& bias, double step_size,
                                    const std::vector<DataPoint>& data, const LossSpec& loss);

// Plain gradient descent started at an arbitrary point, same return shape.
std::vector<Vec> ogd_run_from(const Vec& start, double step_size,
                              const std::vector<DataPoint>& data, const LossSpec& loss);

}  // namespace pfmtl
