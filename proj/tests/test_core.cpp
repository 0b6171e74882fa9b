#include "doctest.h"

#include "icls/burgers.hpp"
#include "icls/core.hpp"
#include "icls/elliptic.hpp"
#include "icls/solver.hpp"
#include "test_problems.hpp"

using namespace icls;
using icls::testing::IdentityProblem;

TEST_CASE("objective is half the squared residual norm") {
  const IdentityProblem p3(3);
  CHECK(objective(p3, Vector::Zero(3), Vector::Zero(3)) == 0.0);

  const IdentityProblem p2(2);
  CHECK(objective(p2, Vector{{3.0, 4.0}}, Vector::Zero(2)) == doctest::Approx(12.5));

  const EllipticProblem ell(assemble_elliptic(5, 1e-3, DesiredState::zero));
  EvalContext ctx;
  const Vector u = Vector::Zero(ell.dims().n);
  CHECK(objective(ell, ell.solve_state(u, ctx), u) == 0.0);
}

TEST_CASE("objective rejects mismatched dimensions") {
  const IdentityProblem p(3);
  CHECK_THROWS_AS(objective(p, Vector::Zero(2), Vector::Zero(3)), ContractError);
  CHECK_THROWS_AS(objective(p, Vector::Zero(3), Vector::Zero(4)), ContractError);
}

TEST_CASE("inner product and norm") {
  CHECK(inner_product(Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}) == 0.0);
  CHECK(norm(Vector{{3.0, 4.0}}) == doctest::Approx(5.0));
  for (Index i = 0; i < 7; ++i) CHECK(norm(Vector::Unit(7, i)) == 1.0);
  CHECK_THROWS_AS(inner_product(Vector::Zero(2), Vector::Zero(3)), ContractError);
}

TEST_CASE("linear operator checks dimensions and satisfies the adjoint identity") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 6);
  const LinearOperator op = icls::testing::dense_operator(a);
  CHECK(op.rows() == 4);
  CHECK(op.cols() == 6);
  CHECK_THROWS_AS(op.apply(Vector::Zero(4)), ContractError);
  CHECK_THROWS_AS(op.apply_transpose(Vector::Zero(6)), ContractError);
  for (int probe = 0; probe < 20; ++probe) {
    const Vector v = icls::testing::random_vector(6, rng);
    const Vector w = icls::testing::random_vector(4, rng);
    const double lhs = inner_product(op.apply(v), w);
    CHECK(std::abs(lhs - inner_product(v, op.apply_transpose(w))) <= 1e-10 * (1.0 + std::abs(lhs)));
  }

  const LinearOperator bad(2, 2, [](const Vector&) { return Vector(Vector::Zero(3)); },
                           [](const Vector& w) { return w; });
  CHECK_THROWS_AS(bad.apply(Vector::Zero(2)), ContractError);
}

TEST_CASE("problem operators satisfy the adjoint identity") {
  std::mt19937_64 rng(5);
  const EllipticProblem ell(assemble_elliptic(5));
  const BurgersProblem bur(assemble_burgers(4, 4, 0.1));
  for (const ImplicitProblem* p : {static_cast<const ImplicitProblem*>(&ell), static_cast<const ImplicitProblem*>(&bur)}) {
    EvalContext ctx;
    const Vector u = icls::testing::random_vector(p->dims().n, rng, 0.3);
    const Vector y = p->solve_state(u, ctx);
    const auto lin = p->linearize(y, u);
    for (const LinearOperator& op : {lin->op_Gu(), lin->op_Gy(), lin->op_cu()}) {
      for (int probe = 0; probe < 20; ++probe) {
        const Vector v = icls::testing::random_vector(op.cols(), rng);
        const Vector w = icls::testing::random_vector(op.rows(), rng);
        const double lhs = inner_product(op.apply(v), w);
        CHECK(std::abs(lhs - inner_product(v, op.apply_transpose(w))) <= 1e-10 * (1.0 + std::abs(lhs)));
      }
    }
    // c_y^{-1} and c_y^{-T} are adjoint to each other as well
    for (int probe = 0; probe < 20; ++probe) {
      const Vector v = icls::testing::random_vector(p->dims().p, rng);
      const Vector w = icls::testing::random_vector(p->dims().p, rng);
      const double lhs = inner_product(lin->solve_cy(v, ctx), w);
      CHECK(std::abs(lhs - inner_product(v, lin->solve_cy_transpose(w, ctx))) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("solve_state meets the declared feasibility tolerance") {
  std::mt19937_64 rng(8);
  const EllipticProblem ell(assemble_elliptic(8));
  const BurgersProblem bur(assemble_burgers(8, 8, 0.1));
  for (const ImplicitProblem* p : {static_cast<const ImplicitProblem*>(&ell), static_cast<const ImplicitProblem*>(&bur)}) {
    EvalContext ctx;
    for (int trial = 0; trial < 3; ++trial) {
      const Vector u = icls::testing::random_vector(p->dims().n, rng, 0.5);
      const Vector y = p->solve_state(u, ctx);
      CHECK(norm(p->constraint_residual(y, u)) <= p->feasibility_tolerance());
    }
    CHECK(ctx.counters.forward_solves == 3);
  }
}

TEST_CASE("evaluation counters are reproducible across identical runs") {
  const EllipticProblem ell(assemble_elliptic(6));
  SolverConfig cfg;
  cfg.theta = 1e-2;
  cfg.eps_R = 1e-8;
  const Vector u0 = Vector::Ones(ell.dims().n);
  const SolveOutcome a = solve(ell, u0, cfg);
  const SolveOutcome b = solve(ell, u0, cfg);
  CHECK(a.counters == b.counters);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].counters == b.trace[i].counters);
}
