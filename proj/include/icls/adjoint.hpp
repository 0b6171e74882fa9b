#pragma once

#include <memory>

#include "icls/core.hpp"

namespace icls {

/// Jacobian of the reduced residual u -> R(y(u), u), applied matrix-free.
///
/// With zeta solving c_y zeta = -c_u, the reduced Jacobian is G_u + G_y zeta.
/// A product with it costs one linearized constraint solve, a product with its
/// transpose one adjoint solve. Construction performs no solves; the
/// linearisation is built on first use.
class ReducedJacobian {
 public:
  /// `y` must be y(u). Problem and context must outlive this object.
  ReducedJacobian(const ImplicitProblem& problem, Vector u, Vector y, EvalContext& ctx);

  Index rows() const { return dims_.m; }
  Index cols() const { return dims_.n; }
  const Vector& u() const { return u_; }
  const Vector& y() const { return y_; }

  /// G_u v + G_y w with c_y w = -c_u v.
  Vector apply(const Vector& v) const;
  /// G_u^T w - c_u^T q with c_y^T q = G_y^T w.
  Vector apply_transpose(const Vector& w) const;

  /// Gradient of 1/2 ||R(y(u),u)||^2 given the residual at the base point.
  Vector gradient(const Vector& residual) const { return apply_transpose(residual); }

  /// The Jacobian as a linear operator (counted like apply/apply_transpose).
  LinearOperator as_operator() const;
  /// The Gauss-Newton matrix G^T G as a composition of two counted products.
  LinearOperator gauss_newton() const;

 private:
  const Linearization& lin() const;

  const ImplicitProblem& problem_;
  ProblemDims dims_;
  Vector u_;
  Vector y_;
  EvalContext& ctx_;
  mutable std::unique_ptr<Linearization> lin_;
};

Vector reduced_jacobian_apply(const ReducedJacobian& jac, const Vector& v);
Vector reduced_jacobian_apply_transpose(const ReducedJacobian& jac, const Vector& w);
Vector reduced_gradient(const ReducedJacobian& jac, const Vector& residual);

}  // namespace icls
