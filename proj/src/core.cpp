#include "icls/core.hpp"

#include <cmath>
#include <span>


namespace icls {

namespace {
std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
}  // namespace

void require_dim(Index actual, Index expected, const char* what) {
  if (actual != expected)
    throw ContractError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                        ", got " + std::to_string(actual));
}

double inner_product(const Vector& a, const Vector& b) {
  require_dim(b.size(), a.size(), "inner_product");
  return kernels::dot(as_span(a), as_span(b));
}

double norm(const Vector& a) { return std::sqrt(inner_product(a, a)); }

Vector multiply(const kernels::CsrMatrix& a, const Vector& x) {
  require_dim(x.size(), static_cast<Index>(a.cols()), "multiply");
  Vector y(static_cast<Index>(a.rows()));
  kernels::spmv(a.view(), as_span(x), {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

Vector LinearOperator::apply(const Vector& v) const {
  require_dim(v.size(), cols_, "LinearOperator::apply");
  Vector out = apply_(v);
  require_dim(out.size(), rows_, "LinearOperator::apply result");
  return out;
}

Vector LinearOperator::apply_transpose(const Vector& w) const {
  require_dim(w.size(), rows_, "LinearOperator::apply_transpose");
  Vector out = apply_t_(w);
  require_dim(out.size(), cols_, "LinearOperator::apply_transpose result");
  return out;
}

Vector Linearization::solve_cy(const Vector& rhs, EvalContext& ctx) const {
  ++ctx.counters.linearized_solves;
  return do_solve_cy(rhs);
}

Vector Linearization::solve_cy_transpose(const Vector& rhs, EvalContext& ctx) const {
  ++ctx.counters.adjoint_solves;
  return do_solve_cy_transpose(rhs);
}

Vector ImplicitProblem::solve_state(const Vector& u, EvalContext& ctx) const {
  require_dim(u.size(), dims().n, "solve_state");
  ++ctx.counters.forward_solves;
  return do_solve_state(u);
}

double objective(const ImplicitProblem& problem, const Vector& y, const Vector& u) {
  const ProblemDims d = problem.dims();
  require_dim(y.size(), d.n_y, "objective(y)");
  require_dim(u.size(), d.n, "objective(u)");
  const Vector r = problem.residual(y, u);
  return 0.5 * inner_product(r, r);
}

}  // namespace icls
