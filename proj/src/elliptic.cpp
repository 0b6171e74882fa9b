#include "icls/elliptic.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/SparseCholesky>

namespace icls {

DesiredState parse_desired_state(const std::string& text) {
  if (text == "zero" || text == "0") return DesiredState::zero;
  if (text == "one" || text == "1") return DesiredState::one;
  throw ContractError("unknown desired state '" + text + "'");
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds the contributions of a right triangle with legs h. `tri` lists the
// right-angle vertex first; entries are global interior indices or -1 for
// boundary nodes.
void add_right_triangle(const std::array<Index, 3>& tri, double h, Triplets& k, Triplets& m) {
  static constexpr double kLocal[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  const double area = 0.5 * h * h;
  for (int a = 0; a < 3; ++a) {
    if (tri[a] < 0) continue;
    for (int b = 0; b < 3; ++b) {
      if (tri[b] < 0) continue;
      if (kLocal[a][b] != 0.0) k.emplace_back(tri[a], tri[b], kLocal[a][b]);
      m.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
    }
  }
}

}  // namespace

EllipticInstance assemble_elliptic(int N, double lambda, DesiredState z) {
  if (N < 2) throw ContractError("assemble_elliptic: N must be >= 2");
  if (!(lambda > 0.0)) throw ContractError("assemble_elliptic: lambda must be positive");

  EllipticInstance inst;
  inst.N = N;
  inst.n = static_cast<Index>(N - 1) * (N - 1);
  inst.h = 1.0 / N;
  inst.lambda = lambda;

  auto node = [N](int i, int j) -> Index {
    if (i <= 0 || j <= 0 || i >= N || j >= N) return -1;
    return interior_index(N, i, j);
  };

  Triplets k, m;
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      // cell [i, i+1] x [j, j+1] split along the (i,j)-(i+1,j+1) diagonal
      add_right_triangle({node(i + 1, j), node(i, j), node(i + 1, j + 1)}, inst.h, k, m);
      add_right_triangle({node(i, j + 1), node(i, j), node(i + 1, j + 1)}, inst.h, k, m);
    }
  }
  inst.K.resize(inst.n, inst.n);
  inst.K.setFromTriplets(k.begin(), k.end());
  inst.M.resize(inst.n, inst.n);
  inst.M.setFromTriplets(m.begin(), m.end());
  inst.K.makeCompressed();
  inst.M.makeCompressed();

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(inst.M);
  if (llt.info() != Eigen::Success) throw SolveError("assemble_elliptic: mass matrix factorization failed");
  inst.L_M = llt.matrixL();
  inst.L_M.makeCompressed();

  inst.z_choice = z;
  inst.z = z == DesiredState::zero ? Vector::Zero(inst.n) : Vector::Ones(inst.n);
  inst.f = Vector::Zero(inst.n);
  return inst;
}

struct EllipticProblem::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

namespace {

class EllipticLinearization final : public Linearization {
 public:
  explicit EllipticLinearization(const EllipticProblem& p) : p_(p) {}

  LinearOperator op_Gy() const override {
    const Index n = p_.instance().n;
    return LinearOperator(
        2 * n, n,
        [this, n](const Vector& v) {
          Vector out = Vector::Zero(2 * n);
          out.head(n) = p_.factor_t_times(v);
          return out;
        },
        [this, n](const Vector& w) { return p_.factor_times(w.head(n)); });
  }

  LinearOperator op_Gu() const override {
    const Index n = p_.instance().n;
    const double s = std::sqrt(p_.instance().lambda);
    return LinearOperator(
        2 * n, n,
        [this, n, s](const Vector& v) {
          Vector out = Vector::Zero(2 * n);
          out.tail(n) = s * p_.factor_t_times(v);
          return out;
        },
        [this, n, s](const Vector& w) { return Vector(s * p_.factor_times(w.tail(n))); });
  }

  LinearOperator op_cu() const override {
    const Index n = p_.instance().n;
    auto minus_m = [this](const Vector& v) { return Vector(-p_.mass_times(v)); };
    return LinearOperator(n, n, minus_m, minus_m);
  }

 protected:
  Vector do_solve_cy(const Vector& rhs) const override { return p_.stiffness_solve(rhs); }
  Vector do_solve_cy_transpose(const Vector& rhs) const override { return p_.stiffness_solve(rhs); }

 private:
  const EllipticProblem& p_;
};

}  // namespace

EllipticProblem::EllipticProblem(EllipticInstance inst)
    : inst_(std::move(inst)),
      K_(inst_.K),
      M_(inst_.M),
      L_(inst_.L_M),
      Lt_(Eigen::SparseMatrix<double>(inst_.L_M.transpose())),
      k_factor_(std::make_unique<Factor>()) {
  k_factor_->llt.compute(inst_.K);
  if (k_factor_->llt.info() != Eigen::Success) throw SolveError("elliptic: stiffness factorization failed");
}

EllipticProblem::~EllipticProblem() = default;

ProblemDims EllipticProblem::dims() const { return {inst_.n, inst_.n, 2 * inst_.n, inst_.n}; }

std::string EllipticProblem::name() const {
  return std::string("elliptic-") + (inst_.z_choice == DesiredState::zero ? "z0" : "z1");
}

Vector EllipticProblem::stiffness_solve(const Vector& rhs) const {
  require_dim(rhs.size(), inst_.n, "elliptic stiffness solve");
  Vector x = k_factor_->llt.solve(rhs);
  if (k_factor_->llt.info() != Eigen::Success) throw SolveError("elliptic: stiffness solve failed");
  return x;
}

Vector EllipticProblem::do_solve_state(const Vector& u) const {
  return stiffness_solve(mass_times(u) + inst_.f);
}

Vector EllipticProblem::residual(const Vector& y, const Vector& u) const {
  require_dim(y.size(), inst_.n, "elliptic residual(y)");
  require_dim(u.size(), inst_.n, "elliptic residual(u)");
  Vector r(2 * inst_.n);
  r.head(inst_.n) = factor_t_times(y - inst_.z);
  r.tail(inst_.n) = std::sqrt(inst_.lambda) * factor_t_times(u);
  return r;
}

Vector EllipticProblem::constraint_residual(const Vector& y, const Vector& u) const {
  require_dim(y.size(), inst_.n, "elliptic constraint(y)");
  require_dim(u.size(), inst_.n, "elliptic constraint(u)");
  return multiply(K_, y) - mass_times(u) - inst_.f;
}

std::unique_ptr<Linearization> EllipticProblem::linearize(const Vector&, const Vector&) const {
  return std::make_unique<EllipticLinearization>(*this);
}

}  // namespace icls
