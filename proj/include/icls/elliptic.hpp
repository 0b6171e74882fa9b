#pragma once

#include <memory>

#include <Eigen/SparseCore>

#include "icls/core.hpp"

namespace icls {

enum class DesiredState { zero, one };

DesiredState parse_desired_state(const std::string& text);

/// Discrete elliptic control problem on the unit square:
///   min 1/2 (y - z)^T M (y - z) + lambda/2 u^T M u   s.t.  K y = M u + f,
/// P1 elements on a uniform right-triangle mesh, homogeneous Dirichlet data.
struct EllipticInstance {
  int N = 0;     // subdivisions per side
  Index n = 0;   // (N - 1)^2 interior nodes
  double h = 0;  // 1 / N
  double lambda = 1e-3;
  Eigen::SparseMatrix<double> K;    // stiffness
  Eigen::SparseMatrix<double> M;    // consistent mass
  Eigen::SparseMatrix<double> L_M;  // lower Cholesky factor, M = L_M L_M^T
  DesiredState z_choice = DesiredState::zero;
  Vector z;
  Vector f;
};

/// Interior node (i, j), 1 <= i, j <= N - 1, in lexicographic order.
inline Index interior_index(int N, int i, int j) { return (i - 1) + static_cast<Index>(j - 1) * (N - 1); }

EllipticInstance assemble_elliptic(int N, double lambda = 1e-3, DesiredState z = DesiredState::zero);

class EllipticProblem final : public ImplicitProblem {
 public:
  explicit EllipticProblem(EllipticInstance inst);
  ~EllipticProblem() override;

  const EllipticInstance& instance() const { return inst_; }

  ProblemDims dims() const override;
  std::string name() const override;
  /// [L_M^T (y - z); sqrt(lambda) L_M^T u]
  Vector residual(const Vector& y, const Vector& u) const override;
  Vector constraint_residual(const Vector& y, const Vector& u) const override;
  double feasibility_tolerance() const override { return 1e-10; }
  std::unique_ptr<Linearization> linearize(const Vector& y, const Vector& u) const override;

  Vector mass_times(const Vector& v) const { return multiply(M_, v); }
  Vector factor_t_times(const Vector& v) const { return multiply(Lt_, v); }  // L_M^T v
  Vector factor_times(const Vector& v) const { return multiply(L_, v); }     // L_M v
  Vector stiffness_solve(const Vector& rhs) const;

 protected:
  Vector do_solve_state(const Vector& u) const override;

 private:
  struct Factor;

  EllipticInstance inst_;
  kernels::CsrMatrix K_, M_, L_, Lt_;
  std::unique_ptr<Factor> k_factor_;
};

}  // namespace icls
