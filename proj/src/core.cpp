#include "pfmtl/core.hpp"

#include <cmath>
#include <numeric>

namespace pfmtl {

namespace {

void require_same_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(where) + ": got " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double distance(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "distance");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec zeros(std::size_t dim) { return Vec(dim, 0.0); }

void add_scaled(Vec& y, double a, const Vec& x) {
  require_same_dim(y, x, "add_scaled");
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}

Vec scaled(const Vec& v, double a) {
  Vec out(v);
  for (double& c : out) c *= a;
  return out;
}

Ball unit_ball(std::size_t dim) {
  if (dim == 0) throw InvalidParameter("unit_ball: dim must be >= 1");
  return Ball{zeros(dim), 1.0};
}

Vec project_ball(const Vec& v, const Ball& ball) {
  require_same_dim(v, ball.center, "project_ball");
  if (ball.radius <= 0.0) throw InvalidParameter("project_ball: radius must be > 0");
  const double d = distance(v, ball.center);
  if (d <= ball.radius) return v;
  Vec out(ball.center);
  add_scaled(out, ball.radius / d, v);
  add_scaled(out, -ball.radius / d, ball.center);
  return out;
}

double phi(double a) {
  if (a < 0.0) throw InvalidParameter("phi: argument must be >= 0");
  return std::sqrt(std::log1p(24.0 * a * a));
}

BetState::BetState(double initial_wealth, double scale)
    : initial_wealth_(initial_wealth), scale_(scale), wealth_(initial_wealth) {
  if (!(initial_wealth > 0.0)) throw InvalidParameter("BetState: initial wealth must be > 0");
  if (!(scale > 0.0)) throw InvalidParameter("BetState: scale must be > 0");
}

void BetState::step(double g) {
  if (std::abs(g) > scale_ * (1.0 + kBoundSlack)) {
    throw ScaleViolation("BetState: |g| = " + std::to_string(std::abs(g)) +
                         " exceeds scale " + std::to_string(scale_));
  }
  const double k = static_cast<double>(round_);
  wealth_ -= (g / scale_) * bet_;
  fraction_ = ((k - 1.0) * fraction_ - g / scale_) / k;
  bet_ = fraction_ * wealth_;
  ++round_;
}

DirectionState::DirectionState(Ball ball, double scale)
    : ball_(std::move(ball)), scale_(scale), iterate_(ball_.center) {
  if (ball_.dim() == 0) throw InvalidParameter("DirectionState: ball must have dim >= 1");
  if (!(ball_.radius > 0.0)) throw InvalidParameter("DirectionState: radius must be > 0");
  if (!(scale > 0.0)) throw InvalidParameter("DirectionState: scale must be > 0");
}

double DirectionState::step_size() const {
  return ball_.diameter() / (scale_ * std::sqrt(2.0 * static_cast<double>(round_)));
}

void DirectionState::step(const Vec& g) {
  if (g.size() != ball_.dim()) {
    throw DimensionMismatch("DirectionState: gradient dim " + std::to_string(g.size()) +
                            " vs ball dim " + std::to_string(ball_.dim()));
  }
  if (norm(g) > scale_ * (1.0 + kBoundSlack)) {
    throw ScaleViolation("DirectionState: |g| exceeds scale " + std::to_string(scale_));
  }
  Vec moved(iterate_);
  add_scaled(moved, -step_size(), g);
  iterate_ = project_ball(moved, ball_);
  ++round_;
}

}  // namespace pfmtl
