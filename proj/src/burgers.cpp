#include "icls/burgers.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <lapacke.h>

namespace icls {

Eigen::MatrixXd Tridiagonal::to_dense() const {
  const Index n = size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = diag[i];
    if (i + 1 < n) {
      a(i + 1, i) = lower[i];
      a(i, i + 1) = upper[i];
    }
  }
  return a;
}

TridiagonalLu::TridiagonalLu(const Tridiagonal& a)
    : dl_(a.lower.data(), a.lower.data() + a.lower.size()),
      d_(a.diag.data(), a.diag.data() + a.diag.size()),
      du_(a.upper.data(), a.upper.data() + a.upper.size()),
      du2_(d_.size() > 2 ? d_.size() - 2 : 1),
      ipiv_(d_.size()) {
  const auto n = static_cast<lapack_int>(d_.size());
  const lapack_int info = LAPACKE_dgttrf(n, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "tridiagonal factorization failed (dgttrf info " << info << ")";
    throw SolveError(msg.str());
  }
}

Vector TridiagonalLu::solve_impl(const Vector& rhs, char trans) const {
  const auto n = static_cast<lapack_int>(d_.size());
  require_dim(rhs.size(), n, "TridiagonalLu::solve");
  Vector x = rhs;
  const lapack_int info = LAPACKE_dgttrs(LAPACK_COL_MAJOR, trans, n, 1, dl_.data(), d_.data(), du_.data(),
                                         du2_.data(), ipiv_.data(), x.data(), n);
  if (info != 0) throw SolveError("tridiagonal solve failed");
  return x;
}

Vector TridiagonalLu::solve(const Vector& rhs) const { return solve_impl(rhs, 'N'); }
Vector TridiagonalLu::solve_transpose(const Vector& rhs) const { return solve_impl(rhs, 'T'); }

namespace {

Eigen::SparseMatrix<double> tridiag(Index n, double lo, double mid, double up) {
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) {
    if (mid != 0.0) t.emplace_back(i, i, mid);
    if (i + 1 < n) {
      t.emplace_back(i + 1, i, lo);
      t.emplace_back(i, i + 1, up);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

BurgersInstance assemble_burgers(int Nx, int Nt, double nu, double omega) {
  if (Nx < 3) throw ContractError("assemble_burgers: Nx must be >= 3");
  if (Nt < 2) throw ContractError("assemble_burgers: Nt must be >= 2");
  if (!(nu > 0.0)) throw ContractError("assemble_burgers: nu must be positive");
  if (!(omega > 0.0)) throw ContractError("assemble_burgers: omega must be positive");

  BurgersInstance inst;
  inst.Nx = Nx;
  inst.Nt = Nt;
  inst.h = 1.0 / Nx;
  inst.dt = 1.0 / Nt;
  inst.nu = nu;
  inst.omega = omega;
  inst.M = tridiag(Nx, inst.h / 6.0, 4.0 * inst.h / 6.0, inst.h / 6.0);
  inst.B = tridiag(Nx, -0.5, 0.0, 0.5);
  inst.C = tridiag(Nx, -1.0 / inst.h, 2.0 / inst.h, -1.0 / inst.h);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(inst.M);
  if (llt.info() != Eigen::Success) throw SolveError("assemble_burgers: mass matrix factorization failed");
  inst.L_M = llt.matrixL();
  inst.L_M.makeCompressed();

  inst.f = Vector::Zero(Nx);
  inst.y0 = Vector::Zero(Nx);
  inst.y0.head(Nx / 2).setOnes();
  inst.z = inst.y0;
  return inst;
}

namespace {

class BurgersLinearization final : public Linearization {
 public:
  BurgersLinearization(const BurgersProblem& p, const Vector& y) : p_(p) {
    const Index nx = p.block_size();
    const int nt = p.instance().Nt;
    factors_.reserve(static_cast<std::size_t>(nt));
    for (int i = 1; i <= nt; ++i) factors_.emplace_back(p.step_jacobian(y.segment(i * nx, nx)));
  }

  LinearOperator op_Gy() const override { return half_operator(0, std::sqrt(p_.instance().dt)); }

  LinearOperator op_Gu() const override {
    return half_operator(1, std::sqrt(p_.instance().omega * p_.instance().dt));
  }

  LinearOperator op_cu() const override {
    const Index nx = p_.block_size();
    const Index len = nx * p_.blocks();
    auto act = [this, nx, len](const Vector& v) {
      Vector out = Vector::Zero(len);
      for (Index b = 1; b < p_.blocks(); ++b) out.segment(b * nx, nx) = -p_.mass_times(v.segment(b * nx, nx));
      return out;
    };
    return LinearOperator(len, len, act, act);
  }

 protected:
  Vector do_solve_cy(const Vector& rhs) const override {
    const Index nx = p_.block_size();
    const double inv_dt = 1.0 / p_.instance().dt;
    require_dim(rhs.size(), nx * p_.blocks(), "burgers solve_cy");
    Vector w(rhs.size());
    w.head(nx) = rhs.head(nx);
    for (Index b = 1; b < p_.blocks(); ++b) {
      const Vector prev = w.segment((b - 1) * nx, nx);
      w.segment(b * nx, nx) =
          factors_[static_cast<std::size_t>(b - 1)].solve(rhs.segment(b * nx, nx) + inv_dt * p_.mass_times(prev));
    }
    return w;
  }

  Vector do_solve_cy_transpose(const Vector& rhs) const override {
    const Index nx = p_.block_size();
    const Index last = p_.blocks() - 1;
    const double inv_dt = 1.0 / p_.instance().dt;
    require_dim(rhs.size(), nx * p_.blocks(), "burgers solve_cy_transpose");
    Vector q(rhs.size());
    q.segment(last * nx, nx) = factors_[static_cast<std::size_t>(last - 1)].solve_transpose(rhs.segment(last * nx, nx));
    for (Index b = last - 1; b >= 1; --b) {
      const Vector next = q.segment((b + 1) * nx, nx);
      q.segment(b * nx, nx) =
          factors_[static_cast<std::size_t>(b - 1)].solve_transpose(rhs.segment(b * nx, nx) + inv_dt * p_.mass_times(next));
    }
    q.head(nx) = rhs.head(nx) + inv_dt * p_.mass_times(q.segment(nx, nx));
    return q;
  }

 private:
  // Block-diagonal scale * L_M^T mapping a trajectory into half `half` of R.
  LinearOperator half_operator(int half, double scale) const {
    const Index nx = p_.block_size();
    const Index len = nx * p_.blocks();
    const Index offset = half * len;
    return LinearOperator(
        2 * len, len,
        [this, nx, len, offset, scale](const Vector& v) {
          Vector out = Vector::Zero(2 * len);
          for (Index b = 0; b < p_.blocks(); ++b)
            out.segment(offset + b * nx, nx) = scale * p_.factor_t_times(v.segment(b * nx, nx));
          return out;
        },
        [this, nx, len, offset, scale](const Vector& w) {
          Vector out(len);
          for (Index b = 0; b < p_.blocks(); ++b)
            out.segment(b * nx, nx) = scale * p_.factor_times(w.segment(offset + b * nx, nx));
          return out;
        });
  }

  const BurgersProblem& p_;
  std::vector<TridiagonalLu> factors_;
};

}  // namespace

BurgersProblem::BurgersProblem(BurgersInstance inst)
    : inst_(std::move(inst)),
      M_(inst_.M),
      B_(inst_.B),
      C_(inst_.C),
      L_(inst_.L_M),
      Lt_(Eigen::SparseMatrix<double>(inst_.L_M.transpose())) {}

ProblemDims BurgersProblem::dims() const {
  const Index len = block_size() * blocks();
  return {len, len, 2 * len, len};
}

std::string BurgersProblem::name() const {
  std::ostringstream s;
  s << "burgers-nu" << inst_.nu;
  return s.str();
}

double BurgersProblem::feasibility_tolerance() const {
  return 10.0 * inst_.newton_tol * std::sqrt(static_cast<double>(blocks()));
}

Vector BurgersProblem::step_residual(const Vector& y_prev, const Vector& y_next, const Vector& u_next) const {
  require_dim(y_prev.size(), inst_.Nx, "step_residual(y_prev)");
  require_dim(y_next.size(), inst_.Nx, "step_residual(y_next)");
  require_dim(u_next.size(), inst_.Nx, "step_residual(u_next)");
  const double inv_dt = 1.0 / inst_.dt;
  return inv_dt * mass_times(y_next - y_prev) + 0.5 * multiply(B_, y_next.cwiseProduct(y_next)) +
         inst_.nu * multiply(C_, y_next) - inst_.f - mass_times(u_next);
}

Tridiagonal BurgersProblem::step_jacobian(const Vector& y_next) const {
  const Index n = inst_.Nx;
  require_dim(y_next.size(), n, "step_jacobian");
  const double inv_dt = 1.0 / inst_.dt;
  const double m_diag = 4.0 * inst_.h / 6.0, m_off = inst_.h / 6.0;
  const double c_diag = 2.0 / inst_.h, c_off = -1.0 / inst_.h;
  Tridiagonal a;
  a.diag = Vector::Constant(n, inv_dt * m_diag + inst_.nu * c_diag);
  a.lower.resize(n - 1);
  a.upper.resize(n - 1);
  for (Index i = 0; i + 1 < n; ++i) {
    // (B diag(y))_{i+1,i} = -y_i / 2, (B diag(y))_{i,i+1} = y_{i+1} / 2
    a.lower[i] = inv_dt * m_off + inst_.nu * c_off - 0.5 * y_next[i];
    a.upper[i] = inv_dt * m_off + inst_.nu * c_off + 0.5 * y_next[i + 1];
  }
  return a;
}

Vector BurgersProblem::newton_step(const Vector& y_prev, const Vector& u_next, int step_index) const {
  Vector y = y_prev;
  Vector c = step_residual(y_prev, y, u_next);
  double c_norm = norm(c);
  for (int it = 0; it < inst_.newton_max_iter && c_norm > inst_.newton_tol; ++it) {
    const TridiagonalLu lu(step_jacobian(y));
    y -= lu.solve(c);
    c = step_residual(y_prev, y, u_next);
    c_norm = norm(c);
  }
  if (!(c_norm <= inst_.newton_tol)) {
    std::ostringstream msg;
    msg << "burgers: Newton did not converge at time step " << step_index << " (residual " << c_norm << ")";
    throw SolveError(msg.str());
  }
  return y;
}

Vector BurgersProblem::do_solve_state(const Vector& u) const {
  const Index nx = block_size();
  Vector y(nx * blocks());
  y.head(nx) = inst_.y0;
  for (Index b = 1; b < blocks(); ++b)
    y.segment(b * nx, nx) = newton_step(y.segment((b - 1) * nx, nx), u.segment(b * nx, nx), static_cast<int>(b));
  return y;
}

Vector BurgersProblem::residual(const Vector& y, const Vector& u) const {
  const Index nx = block_size();
  const Index len = nx * blocks();
  require_dim(y.size(), len, "burgers residual(y)");
  require_dim(u.size(), len, "burgers residual(u)");
  const double sy = std::sqrt(inst_.dt);
  const double su = std::sqrt(inst_.omega * inst_.dt);
  Vector r(2 * len);
  for (Index b = 0; b < blocks(); ++b) {
    r.segment(b * nx, nx) = sy * factor_t_times(y.segment(b * nx, nx) - inst_.z);
    r.segment(len + b * nx, nx) = su * factor_t_times(u.segment(b * nx, nx));
  }
  return r;
}

Vector BurgersProblem::constraint_residual(const Vector& y, const Vector& u) const {
  const Index nx = block_size();
  require_dim(y.size(), nx * blocks(), "burgers constraint(y)");
  require_dim(u.size(), nx * blocks(), "burgers constraint(u)");
  Vector c(y.size());
  c.head(nx) = y.head(nx) - inst_.y0;
  for (Index b = 1; b < blocks(); ++b)
    c.segment(b * nx, nx) = step_residual(y.segment((b - 1) * nx, nx), y.segment(b * nx, nx), u.segment(b * nx, nx));
  return c;
}

std::unique_ptr<Linearization> BurgersProblem::linearize(const Vector& y, const Vector&) const {
  require_dim(y.size(), block_size() * blocks(), "burgers linearize(y)");
  return std::make_unique<BurgersLinearization>(*this, y);
}

}  // namespace icls
