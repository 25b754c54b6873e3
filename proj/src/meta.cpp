#include "pfmtl/meta.hpp"

namespace pfmtl {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Aggressive: return "aggressive";
    case Variant::Lazy: return "lazy";
    case Variant::Itl: return "itl";
    case Variant::FixedBias: return "fixed";
  }
  throw InvalidParameter("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "aggressive") return Variant::Aggressive;
  if (name == "lazy") return Variant::Lazy;
  if (name == "itl") return Variant::Itl;
  if (name == "fixed") return Variant::FixedBias;
  throw InvalidParameter("unknown variant \"" + name +
                         "\" (expected aggressive, lazy, itl or fixed)");
}

MetaLearner::MetaLearner(Variant variant, Vec fixed, double inner_wealth, double meta_wealth,
                         double lipschitz, double input_bound, std::size_t task_size,
                         std::size_t dim, double meta_scale)
    : variant_(variant),
      fixed_bias_(std::move(fixed)),
      inner_(variant == Variant::FixedBias ? fixed_bias_ : zeros(dim), inner_wealth, lipschitz,
             input_bound),
      meta_magnitude_(meta_wealth, meta_scale),
      meta_direction_(unit_ball(dim), meta_scale),
      grad_sum_(zeros(dim)),
      task_size_(task_size) {}

MetaLearner MetaLearner::aggressive(double inner_wealth, double meta_wealth, double lipschitz,
                                    double input_bound, std::size_t task_size, std::size_t dim) {
  if (task_size == 0) throw InvalidParameter("aggressive: task size must be >= 1");
  return MetaLearner(Variant::Aggressive, Vec(), inner_wealth, meta_wealth, lipschitz, input_bound,
                     task_size, dim, lipschitz * input_bound);
}

MetaLearner MetaLearner::lazy(double inner_wealth, double meta_wealth, double lipschitz,
                              double input_bound, std::size_t task_size, std::size_t dim) {
  if (task_size == 0) throw InvalidParameter("lazy: task size must be >= 1");
  return MetaLearner(Variant::Lazy, Vec(), inner_wealth, meta_wealth, lipschitz, input_bound,
                     task_size, dim, lipschitz * input_bound * static_cast<double>(task_size));
}

MetaLearner MetaLearner::itl(double inner_wealth, double lipschitz, double input_bound,
                             std::size_t dim) {
  return MetaLearner(Variant::Itl, Vec(), inner_wealth, 1.0, lipschitz, input_bound, 0, dim,
                     lipschitz * input_bound);
}

MetaLearner MetaLearner::fixed_bias(Vec bias, double inner_wealth, double lipschitz,
                                    double input_bound) {
  if (bias.empty()) throw InvalidParameter("fixed_bias: bias must have dim >= 1");
  const std::size_t dim = bias.size();
  return MetaLearner(Variant::FixedBias, std::move(bias), inner_wealth, 1.0, lipschitz,
                     input_bound, 0, dim, lipschitz * input_bound);
}

Vec MetaLearner::current_bias() const {
  if (variant_ == Variant::Aggressive) {
    return scaled(meta_direction_.iterate(), meta_magnitude_.bet());
  }
  return inner_.bias();
}

MetaStep MetaLearner::observe(const Vec& x, double y, const LossSpec& loss) {
  if (task_size_ != 0 && points_ == task_size_) {
    throw ProtocolError("observe: task " + std::to_string(task_) + " already has " +
                        std::to_string(task_size_) + " points, call end_task first");
  }
  MetaStep out;
  out.task = task_;
  out.index = points_ + 1;
  out.global = global_;
  if (variant_ == Variant::Aggressive) {
    inner_.set_bias(current_bias());
  }
  out.bias = inner_.bias();
  WithinStep ws = inner_.evaluate(x, y, loss);
  if (variant_ == Variant::Aggressive) {
    // Meta update first, from the same gradient the inner learner absorbs.
    // The two touch disjoint state, so the order is unobservable.
    out.meta_gv = dot(ws.gradient, meta_direction_.iterate());
    out.meta_p = meta_magnitude_.bet();
    meta_direction_.step(ws.gradient);
    meta_magnitude_.step(out.meta_gv);
  }
  inner_.absorb(ws);
  add_scaled(grad_sum_, 1.0, ws.gradient);
  out.inner = std::move(ws);
  ++points_;
  ++global_;
  return out;
}

TaskClose MetaLearner::end_task() {
  if (points_ == 0) {
    throw ProtocolError("end_task: task " + std::to_string(task_) + " has no points");
  }
  if (task_size_ != 0 && points_ != task_size_) {
    throw ProtocolError("end_task: task " + std::to_string(task_) + " has " +
                        std::to_string(points_) + " points, expected " +
                        std::to_string(task_size_));
  }
  TaskClose close;
  close.task = task_;
  close.grad_sum = grad_sum_;
  switch (variant_) {
    case Variant::Aggressive:
      close.next_bias = current_bias();
      break;
    case Variant::Lazy:
      close.meta_gv = dot(grad_sum_, meta_direction_.iterate());
      close.meta_p = meta_magnitude_.bet();
      meta_direction_.step(grad_sum_);
      meta_magnitude_.step(close.meta_gv);
      close.next_bias = scaled(meta_direction_.iterate(), meta_magnitude_.bet());
      break;
    case Variant::Itl:
      close.next_bias = zeros(dim());
      break;
    case Variant::FixedBias:
      close.next_bias = fixed_bias_;
      break;
  }
  inner_.reset(close.next_bias);
  grad_sum_ = zeros(dim());
  points_ = 0;
  ++task_;
  return close;
}

}  // namespace pfmtl
