#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfmtl {

using Vec = std::vector<double>;

// A single labeled example.
struct DataPoint {
  Vec x;
  double y = 0.0;
};

// Errors are split by who is at fault: bad construction arguments, data that
// violates a declared bound, a gradient that exceeds the scale the state was
// built for, mismatched dimensions, or a caller driving a protocol out of order.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ScaleViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputBoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative slack applied when checking declared bounds (|g| <= C, |x| <= R).
// Feeding back inner products of quantities that are themselves only bounded
// up to rounding would otherwise trip the check spuriously.
inline constexpr double kBoundSlack = 1e-9;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double distance(const Vec& a, const Vec& b);
Vec zeros(std::size_t dim);
// y += a * x
void add_scaled(Vec& y, double a, const Vec& x);
Vec scaled(const Vec& v, double a);

struct Ball {
  Vec center;
  double radius = 1.0;

  std::size_t dim() const { return center.size(); }
  double diameter() const { return 2.0 * radius; }
};

Ball unit_ball(std::size_t dim);

// Euclidean projection onto the ball. Points inside come back untouched.
Vec project_ball(const Vec& v, const Ball& ball);

// sqrt(ln(1 + 24 a^2)), the slowly growing factor in the regret guarantees.
double phi(double a);

// Betting-based scalar learner. Starting from wealth eps it bets a signed
// fraction of its current wealth each round against losses g with |g| <= C.
// The bet p_k is the prediction played at round k.
class BetState {
 public:
  BetState(double initial_wealth, double scale);

  // Consume the loss for the current round and move to the next one.
  void step(double g);

  double bet() const { return bet_; }
  double wealth() const { return wealth_; }
  double fraction() const { return fraction_; }
  double scale() const { return scale_; }
  double initial_wealth() const { return initial_wealth_; }
  // 1-based index of the round the current bet is for.
  std::size_t round() const { return round_; }

 private:
  double initial_wealth_;
  double scale_;
  double wealth_;
  double fraction_ = 0.0;
  double bet_ = 0.0;
  std::size_t round_ = 1;
};

// Projected subgradient descent over a ball with the horizon-free step size
// gamma_k = diam(ball) / (scale * sqrt(2k)). Starts at the ball center.
class DirectionState {
 public:
  DirectionState(Ball ball, double scale);

  void step(const Vec& g);

  const Vec& iterate() const { return iterate_; }
  // Step size that will be applied to the current round's gradient.
  double step_size() const;
  double scale() const { return scale_; }
  const Ball& ball() const { return ball_; }
  std::size_t round() const { return round_; }

 private:
  Ball ball_;
  double scale_;
  Vec iterate_;
  std::size_t round_ = 1;
};

}  // namespace pfmtl
