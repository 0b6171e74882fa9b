#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "icls/kernels.hpp"

namespace icls {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when a caller violates a documented precondition (usually dimensions).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear or nonlinear solve inside an operator fails.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_dim(Index actual, Index expected, const char* what);

double inner_product(const Vector& a, const Vector& b);
double norm(const Vector& a);

/// A x through the sparse kernel.
Vector multiply(const kernels::CsrMatrix& a, const Vector& x);

/// Matrix-free linear map R^cols -> R^rows with its transpose.
class LinearOperator {
 public:
  using Action = std::function<Vector(const Vector&)>;

  LinearOperator() = default;
  LinearOperator(Index rows, Index cols, Action apply, Action apply_transpose)
      : rows_(rows), cols_(cols), apply_(std::move(apply)), apply_t_(std::move(apply_transpose)) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  Vector apply(const Vector& v) const;
  Vector apply_transpose(const Vector& w) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Action apply_;
  Action apply_t_;
};

/// Tally of the expensive evaluations performed during a run.
struct EvalCounters {
  std::int64_t forward_solves = 0;
  std::int64_t adjoint_solves = 0;
  std::int64_t linearized_solves = 0;
  std::int64_t jacobian_applies = 0;
  std::int64_t cg_iterations = 0;
  /// Jacobian applications spent estimating the Gauss-Newton operator norm.
  /// Kept apart from jacobian_applies, which counts the algorithm's own products.
  std::int64_t norm_estimate_applies = 0;

  bool operator==(const EvalCounters&) const = default;
};

/// Per-run evaluation context; owns the counters. Never shared between runs.
struct EvalContext {
  EvalCounters counters;
};

struct ProblemDims {
  Index n = 0;    // controls
  Index n_y = 0;  // states
  Index m = 0;    // residual entries
  Index p = 0;    // constraint equations (== n_y)
};

/// Linearisation of an implicit problem at a feasible point (y, u).
///
/// op_Gu / op_Gy are the residual Jacobians, op_cu the constraint Jacobian in
/// u. c_y is only available through solves with it and its transpose.
class Linearization {
 public:
  virtual ~Linearization() = default;

  virtual LinearOperator op_Gu() const = 0;
  virtual LinearOperator op_Gy() const = 0;
  virtual LinearOperator op_cu() const = 0;

  /// Solves c_y w = rhs and counts one linearized solve.
  Vector solve_cy(const Vector& rhs, EvalContext& ctx) const;
  /// Solves c_y^T q = rhs and counts one adjoint solve.
  Vector solve_cy_transpose(const Vector& rhs, EvalContext& ctx) const;

 protected:
  virtual Vector do_solve_cy(const Vector& rhs) const = 0;
  virtual Vector do_solve_cy_transpose(const Vector& rhs) const = 0;
};

/// Least-squares problem min 1/2 ||R(y,u)||^2 subject to c(y,u) = 0, where the
/// constraint determines y uniquely from u.
///
/// Implementations must be safe to call concurrently from independent runs.
class ImplicitProblem {
 public:
  virtual ~ImplicitProblem() = default;

  virtual ProblemDims dims() const = 0;
  virtual std::string name() const = 0;

  /// Returns y(u) and counts one forward solve.
  Vector solve_state(const Vector& u, EvalContext& ctx) const;

  virtual Vector residual(const Vector& y, const Vector& u) const = 0;

  /// c(y,u); used by feasibility tests, not by the solver.
  virtual Vector constraint_residual(const Vector& y, const Vector& u) const = 0;

  /// Bound on ||c(y(u),u)|| guaranteed by solve_state.
  virtual double feasibility_tolerance() const = 0;

  virtual std::unique_ptr<Linearization> linearize(const Vector& y, const Vector& u) const = 0;

 protected:
  virtual Vector do_solve_state(const Vector& u) const = 0;
};

/// 1/2 ||R(y,u)||^2.
double objective(const ImplicitProblem& problem, const Vector& y, const Vector& u);

}  // namespace icls
