#pragma once

#include <functional>

#include "pfmtl/core.hpp"

namespace pfmtl {

// A scalar convex loss of the prediction, together with its Lipschitz
// constant in the prediction argument.
struct LossSpec {
  std::string name;
  double lipschitz = 1.0;
  std::function<double(double prediction, double label)> value;
  std::function<double(double prediction, double label)> subgradient;
};

// |prediction - label|; subgradient is the sign, 0 at the kink.
LossSpec abs_loss();

// Declared upper bound on the norm of the inputs.
struct InputBound {
  double radius = 1.0;

  // Throws InputBoundViolation when |x| exceeds the bound (up to slack).
  void check(const Vec& x) const;
};

// Subgradient of w -> loss(<x, w>, y), i.e. s * x with s a subgradient of the
// scalar loss at the prediction. Its norm is at most lipschitz * |x|.
Vec full_subgradient(const LossSpec& loss, const Vec& x, double y, const Vec& w);

}  // namespace pfmtl
