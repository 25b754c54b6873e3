#include "pfmtl/losses.hpp"

#include <cmath>

namespace pfmtl {

LossSpec abs_loss() {
  LossSpec spec;
  spec.name = "absolute";
  spec.lipschitz = 1.0;
  spec.value = [](double prediction, double label) { return std::abs(prediction - label); };
  spec.subgradient = [](double prediction, double label) {
    const double r = prediction - label;
    if (r > 0.0) return 1.0;
    if (r < 0.0) return -1.0;
    return 0.0;
  };
  return spec;
}

void InputBound::check(const Vec& x) const {
  if (!(radius > 0.0)) throw InvalidParameter("InputBound: radius must be > 0");
  const double n = norm(x);
  if (n > radius * (1.0 + kBoundSlack)) {
    throw InputBoundViolation("input norm " + std::to_string(n) + " exceeds declared bound " +
                              std::to_string(radius));
  }
}

Vec full_subgradient(const LossSpec& loss, const Vec& x, double y, const Vec& w) {
  const double s = loss.subgradient(dot(x, w), y);
  return scaled(x, s);
}

}  // namespace pfmtl
