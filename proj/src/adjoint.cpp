#include "icls/adjoint.hpp"

namespace icls {

ReducedJacobian::ReducedJacobian(const ImplicitProblem& problem, Vector u, Vector y, EvalContext& ctx)
    : problem_(problem), dims_(problem.dims()), u_(std::move(u)), y_(std::move(y)), ctx_(ctx) {
  require_dim(u_.size(), dims_.n, "ReducedJacobian(u)");
  require_dim(y_.size(), dims_.n_y, "ReducedJacobian(y)");
}

const Linearization& ReducedJacobian::lin() const {
  if (!lin_) lin_ = problem_.linearize(y_, u_);
  return *lin_;
}

Vector ReducedJacobian::apply(const Vector& v) const {
  require_dim(v.size(), dims_.n, "ReducedJacobian::apply");
  const Linearization& l = lin();
  const Vector w = l.solve_cy(-l.op_cu().apply(v), ctx_);
  ++ctx_.counters.jacobian_applies;
  return l.op_Gu().apply(v) + l.op_Gy().apply(w);
}

Vector ReducedJacobian::apply_transpose(const Vector& w) const {
  require_dim(w.size(), dims_.m, "ReducedJacobian::apply_transpose");
  const Linearization& l = lin();
  const Vector q = l.solve_cy_transpose(l.op_Gy().apply_transpose(w), ctx_);
  ++ctx_.counters.jacobian_applies;
  return l.op_Gu().apply_transpose(w) - l.op_cu().apply_transpose(q);
}

LinearOperator ReducedJacobian::as_operator() const {
  return LinearOperator(
      rows(), cols(), [this](const Vector& v) { return apply(v); },
      [this](const Vector& w) { return apply_transpose(w); });
}

LinearOperator ReducedJacobian::gauss_newton() const {
  auto h = [this](const Vector& v) { return apply_transpose(apply(v)); };
  return LinearOperator(cols(), cols(), h, h);
}

Vector reduced_jacobian_apply(const ReducedJacobian& jac, const Vector& v) { return jac.apply(v); }

Vector reduced_jacobian_apply_transpose(const ReducedJacobian& jac, const Vector& w) {
  return jac.apply_transpose(w);
}

Vector reduced_gradient(const ReducedJacobian& jac, const Vector& residual) {
  return jac.gradient(residual);
}

}  // namespace icls
