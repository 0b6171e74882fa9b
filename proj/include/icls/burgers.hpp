#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "icls/core.hpp"

namespace icls {

/// Tridiagonal matrix stored by diagonals; lower/upper have size n - 1.
struct Tridiagonal {
  Vector lower;
  Vector diag;
  Vector upper;

  Index size() const { return diag.size(); }
  Eigen::MatrixXd to_dense() const;
};

/// LU factorisation with partial pivoting of a tridiagonal matrix (LAPACK gttrf).
class TridiagonalLu {
 public:
  explicit TridiagonalLu(const Tridiagonal& a);
  Vector solve(const Vector& rhs) const;
  Vector solve_transpose(const Vector& rhs) const;

 private:
  Vector solve_impl(const Vector& rhs, char trans) const;

  std::vector<double> dl_, d_, du_, du2_;
  std::vector<int> ipiv_;
};

/// Optimal control of the viscous Burgers equation on [0,1] x [0,1]: backward
/// Euler in time, P1 elements in space, one Newton solve per time step.
///
/// Controls and states are trajectories of Nt + 1 blocks of length Nx. The
/// initial state block is pinned by the constraint y_0 = y0, so the state
/// Jacobian c_y is square with an identity leading block.
struct BurgersInstance {
  int Nx = 0;
  int Nt = 0;
  double h = 0;   // 1 / Nx
  double dt = 0;  // 1 / Nt
  double nu = 0.1;
  double omega = 0.05;
  Eigen::SparseMatrix<double> M;  // (h/6) tridiag(1, 4, 1)
  Eigen::SparseMatrix<double> B;  // tridiag(-1/2, 0, 1/2)
  Eigen::SparseMatrix<double> C;  // (1/h) tridiag(-1, 2, -1)
  Eigen::SparseMatrix<double> L_M;
  Vector f;
  Vector y0;
  Vector z;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
};

BurgersInstance assemble_burgers(int Nx, int Nt, double nu, double omega = 0.05);

class BurgersProblem final : public ImplicitProblem {
 public:
  explicit BurgersProblem(BurgersInstance inst);

  const BurgersInstance& instance() const { return inst_; }
  Index block_size() const { return inst_.Nx; }
  Index blocks() const { return inst_.Nt + 1; }

  ProblemDims dims() const override;
  std::string name() const override;
  Vector residual(const Vector& y, const Vector& u) const override;
  Vector constraint_residual(const Vector& y, const Vector& u) const override;
  double feasibility_tolerance() const override;
  std::unique_ptr<Linearization> linearize(const Vector& y, const Vector& u) const override;

  /// (1/dt) M y_next - (1/dt) M y_prev + 1/2 B (y_next .* y_next) + nu C y_next - f - M u_next
  Vector step_residual(const Vector& y_prev, const Vector& y_next, const Vector& u_next) const;
  /// Derivative of step_residual in y_next: (1/dt) M + B diag(y_next) + nu C.
  Tridiagonal step_jacobian(const Vector& y_next) const;
  /// Newton solve of step_residual(y_prev, . , u_next) = 0 started at y_prev.
  Vector newton_step(const Vector& y_prev, const Vector& u_next, int step_index) const;

  Vector mass_times(const Vector& v) const { return multiply(M_, v); }
  Vector factor_t_times(const Vector& v) const { return multiply(Lt_, v); }
  Vector factor_times(const Vector& v) const { return multiply(L_, v); }

 protected:
  Vector do_solve_state(const Vector& u) const override;

 private:
  BurgersInstance inst_;
  kernels::CsrMatrix M_, B_, C_, L_, Lt_;
};

}  // namespace icls
