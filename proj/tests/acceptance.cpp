// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icls/adjoint.hpp"
#include "icls/burgers.hpp"
#include "icls/elliptic.hpp"
#include "icls/harness.hpp"
#include "icls/solver.hpp"
#include "icls/subproblem.hpp"
#include "test_problems.hpp"

using namespace icls;
using namespace icls::testing;

namespace {

const std::vector<double> kThetaGrid{0.0, 1e-6, 1e-4, 1e-2, 1e-1, 5e-1};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

// Dynamics checks applied to every solver run made by this binary.
struct DynamicsLedger {
  int runs = 0;
  int iterations = 0;
  int violations = 0;
  std::string first;

  void violation(const std::string& where) {
    if (violations++ == 0) first = where;
  }

  void check(const std::string& label, const SolveOutcome& out, const SolverConfig& cfg) {
    ++runs;
    double prev_J = -1.0;
    for (std::size_t i = 0; i < out.trace.size(); ++i) {
      const IterationTrace& t = out.trace[i];
      ++iterations;
      const std::string at = label + " k=" + std::to_string(t.k);
      const double J = 0.5 * t.residual_norm * t.residual_norm;
      if (prev_J >= 0.0 && J > prev_J) violation(at + " objective increased");
      prev_J = J;
      if (t.success != (t.rho >= cfg.eta)) violation(at + " acceptance differs from rho >= eta");
      if (i + 1 < out.trace.size()) {
        const double next = out.trace[i + 1].gamma;
        const double expected = t.success ? std::max(0.5 * t.gamma, cfg.gamma_min) : 2.0 * t.gamma;
        if (next != expected) violation(at + " gamma update");
      }
    }
    if (!out.trace.empty()) {
      const double J_last = 0.5 * out.state.R.squaredNorm();
      if (J_last > prev_J) violation(label + " final objective increased");
    }
    if (out.counters.forward_solves != out.iterations() + 1) violation(label + " pde_solves != iterations + 1");
  }
};

DynamicsLedger g_dynamics;

SolveOutcome tracked_solve(const std::string& label, const ImplicitProblem& p, const Vector& u0, const SolverConfig& cfg,
                           const StepObserver& observer = {}) {
  SolveOutcome out = solve(p, u0, cfg, {}, observer);
  g_dynamics.check(label, out, cfg);
  return out;
}

SolverConfig config(double theta, double eps_R, double eps_g) {
  SolverConfig cfg;
  cfg.theta = theta;
  cfg.eps_R = eps_R;
  cfg.eps_g = eps_g;
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict gradient_correctness() {
  Verdict v;
  double worst_e = 0.0, worst_b = 0.0;
  auto rel = [](const ImplicitProblem& p, const Vector& u) {
    EvalContext ctx;
    const Vector y = p.solve_state(u, ctx);
    const Vector g = ReducedJacobian(p, u, y, ctx).gradient(p.residual(y, u));
    const Vector fd = fd_gradient_oracle(p, u, 1e-6);
    return (fd - g).norm() / g.norm();
  };
  std::mt19937_64 rng(101);
  const EllipticProblem e(assemble_elliptic(5, 1e-3, DesiredState::one));
  worst_e = std::max(worst_e, rel(e, Vector::Zero(e.dims().n)));
  for (int t = 0; t < 3; ++t) worst_e = std::max(worst_e, rel(e, random_vector(e.dims().n, rng)));
  const BurgersProblem b(assemble_burgers(8, 8, 0.1));
  for (int t = 0; t < 3; ++t) worst_b = std::max(worst_b, rel(b, random_vector(b.dims().n, rng)));
  if (!(worst_e <= 1e-5)) v.fail("elliptic FD error too large; ");
  if (!(worst_b <= 1e-4)) v.fail("burgers FD error too large; ");
  v.detail << "elliptic max rel err " << fmt(worst_e) << ", burgers " << fmt(worst_b);
  return v;
}

Verdict adjoint_identity() {
  Verdict v;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  auto probe = [&](const ImplicitProblem& p, double scale) {
    const Vector u = random_vector(p.dims().n, rng, scale);
    EvalContext ctx;
    const ReducedJacobian jac(p, u, p.solve_state(u, ctx), ctx);
    for (int t = 0; t < 20; ++t) {
      const Vector x = random_vector(p.dims().n, rng), w = random_vector(p.dims().m, rng);
      const double lhs = jac.apply(x).dot(w), rhs = x.dot(jac.apply_transpose(w));
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  };
  const EllipticProblem e(assemble_elliptic(20, 1e-3, DesiredState::one));
  probe(e, 1.0);
  const BurgersProblem b(assemble_burgers(16, 16, 0.1));
  probe(b, 0.5);
  if (!(worst <= 1e-10)) v.fail("adjoint mismatch; ");
  v.detail << "40 probes, max scaled mismatch " << fmt(worst);
  return v;
}

Verdict step_bounds_along_runs() {
  Verdict v;
  int checks = 0, steps = 0;
  std::string first;
  auto bad = [&](const std::string& what) {
    if (first.empty()) first = what;
  };
  auto run = [&](const std::string& label, const ImplicitProblem& p, const Vector& u0, double eps_R, double eps_g) {
    const Index n = p.dims().n;
    for (double theta : kThetaGrid) {
      const std::string tag = label + " theta=" + fmt(theta);
      tracked_solve(tag, p, u0, config(theta, eps_R, eps_g),
                    [&](const SolverState& st, const SubproblemSpec& spec, const StepResult& step) {
                      ++steps;
                      const Eigen::MatrixXd G = dense_jacobian_oracle(p, st.u);
                      const Eigen::MatrixXd H = G.transpose() * G;
                      const double hn = spectral_norm_sym(H);
                      const double gamma = spec.gamma, g_norm = spec.g.norm(), g2 = g_norm * g_norm;
                      const Vector& s = step.s;
                      const double decrease = -spec.g.dot(s) - 0.5 * (s.dot(H * s) + gamma * s.squaredNorm());
                      const double t_norm = (H * s + gamma * s + spec.g).norm();
                      const double factor = std::sqrt(gamma / (hn + gamma));
                      const std::string at = tag + " k=" + std::to_string(st.k);
                      if (theta == 0.0) {
                        if (!(decrease >= 0.5 * g2 / (hn + gamma) - 1e-12)) bad(at + " exact decrease");
                        if (!(t_norm <= 1e-10 * factor * g_norm)) bad(at + " exact residual");
                        checks += 2;
                      } else {
                        if (!(decrease >= (1.0 - theta * theta) / 2.0 * g2 / (hn + gamma) - 1e-12)) bad(at + " inexact decrease");
                        if (!(s.norm() <= (1.0 + theta) * g_norm / gamma + 1e-12)) bad(at + " step norm");
                        if (!(t_norm <= theta * factor * g_norm * (1.0 + 1e-8))) bad(at + " exit residual");
                        checks += 3;
                      }
                      if (step.cg_iters > cg_iteration_bound(n, hn, gamma, theta)) bad(at + " CG iteration bound");
                      ++checks;
                    });
    }
  };
  const EllipticProblem e0(assemble_elliptic(6, 1e-3, DesiredState::zero));
  run("elliptic-z0", e0, Vector::Ones(e0.dims().n), 1e-9, 1e-4);
  const EllipticProblem e1(assemble_elliptic(6, 1e-3, DesiredState::one));
  run("elliptic-z1", e1, Vector::Ones(e1.dims().n), 1e-2, 1e-8);
  const BurgersProblem b1(assemble_burgers(4, 4, 0.1));
  run("burgers-nu0.1", b1, Vector::Zero(b1.dims().n), 1e-2, 1e-6);
  const BurgersProblem b2(assemble_burgers(4, 4, 0.01));
  run("burgers-nu0.01", b2, Vector::Zero(b2.dims().n), 1e-2, 1e-6);
  if (!first.empty()) v.fail("first violation: " + first + "; ");
  v.detail << steps << " steps, " << checks << " bound checks";
  return v;
}

Verdict elliptic_no_rejections() {
  Verdict v;
  const EllipticProblem p(assemble_elliptic(20, 1e-3, DesiredState::one));
  int rejected = 0, iterations = 0;
  double min_rho = 1e300;
  for (double theta : {0.0, 0.5}) {
    const SolveOutcome out = tracked_solve("elliptic-N20 theta=" + fmt(theta), p, Vector::Ones(p.dims().n),
                                           config(theta, 1e-2, 1e-8));
    iterations += out.iterations();
    rejected += out.iterations() - out.successes();
    for (const auto& t : out.trace) min_rho = std::min(min_rho, t.rho);
  }
  if (rejected != 0) v.fail(std::to_string(rejected) + " rejections; ");
  v.detail << iterations << " iterations, min rho " << fmt(min_rho);
  return v;
}

std::map<std::pair<double, double>, std::map<double, SolveOutcome>> run_grid(const std::string& label,
                                                                            const ImplicitProblem& p, const Vector& u0,
                                                                            const std::vector<TolerancePair>& tols) {
  std::map<std::pair<double, double>, std::map<double, SolveOutcome>> out;
  for (const auto& tol : tols)
    for (double theta : kThetaGrid) {
      SolverConfig cfg = config(theta, tol.eps_R, tol.eps_g);
      cfg.max_iter = 300;
      out[{tol.eps_R, tol.eps_g}][theta] = tracked_solve(label + " theta=" + fmt(theta), p, u0, cfg);
    }
  return out;
}

Verdict elliptic_tables() {
  Verdict v;
  const EllipticProblem z0(assemble_elliptic(20, 1e-3, DesiredState::zero));
  const auto g0 = run_grid("elliptic-z0", z0, Vector::Ones(z0.dims().n), {{1e-3, 1e-4}, {1e-6, 1e-4}, {1e-9, 1e-4}});
  for (double eps_R : {1e-3, 1e-6})
    for (const auto& [theta, out] : g0.at({eps_R, 1e-4}))
      if (out.status != SolveStatus::converged_residual)
        v.fail("(a) z=0 eps_R=" + fmt(eps_R) + " theta=" + fmt(theta) + " ended " + to_string(out.status) + "; ");
  for (const auto& [key, row] : g0)
    for (const auto& [theta, out] : row)
      if (out.status == SolveStatus::converged_scaled_gradient) v.fail("(a) z=0 stopped on scaled gradient; ");

  const EllipticProblem z1(assemble_elliptic(20, 1e-3, DesiredState::one));
  const auto g1 = run_grid("elliptic-z1", z1, Vector::Ones(z1.dims().n), {{1e-2, 1e-4}});
  for (const auto& [theta, out] : g1.at({1e-2, 1e-4}))
    if (out.status != SolveStatus::converged_scaled_gradient)
      v.fail("(b) z=1 theta=" + fmt(theta) + " ended " + to_string(out.status) + "; ");

  double worst_growth = 0.0;
  for (double theta : kThetaGrid) {
    if (theta > 1e-2) continue;
    const double coarse = g0.at({1e-3, 1e-4}).at(theta).iterations();
    const double fine = g0.at({1e-9, 1e-4}).at(theta).iterations();
    worst_growth = std::max(worst_growth, fine / coarse);
  }
  if (!(worst_growth <= 2.0)) v.fail("(c) iteration growth " + fmt(worst_growth) + "; ");
  v.detail << "z=0 pde solves at theta=0: ";
  for (double eps_R : {1e-3, 1e-6, 1e-9}) v.detail << g0.at({eps_R, 1e-4}).at(0.0).counters.forward_solves << ' ';
  v.detail << "| z=1 pde solves at theta=0: " << g1.at({1e-2, 1e-4}).at(0.0).counters.forward_solves
           << " | max iteration growth " << fmt(worst_growth);
  return v;
}

Verdict burgers_tables() {
  Verdict v;
  const std::vector<TolerancePair> tols{{1e-2, 1e-3}, {1e-2, 1e-4}, {1e-2, 1e-6}};
  const BurgersProblem b1(assemble_burgers(16, 16, 0.1));
  const BurgersProblem b2(assemble_burgers(16, 16, 0.01));
  const Vector u0 = Vector::Zero(b1.dims().n);
  const auto g1 = run_grid("burgers-nu0.1", b1, u0, tols);
  const auto g2 = run_grid("burgers-nu0.01", b2, u0, tols);

  const auto& row = g1.at({1e-2, 1e-6});
  std::ostringstream jvp, pde;
  std::int64_t prev_jvp = -1, prev_pde = -1;
  for (double theta : kThetaGrid) {
    const SolveOutcome& out = row.at(theta);
    if (out.status == SolveStatus::budget_exhausted) v.fail("nu=0.1 theta=" + fmt(theta) + " exhausted budget; ");
    const auto j = out.counters.jacobian_applies, s = out.counters.forward_solves;
    if (prev_jvp >= 0 && !(j < prev_jvp)) v.fail("jvp not strictly decreasing at theta=" + fmt(theta) + "; ");
    if (theta > 1e-2 && prev_pde >= 0 && s < prev_pde) v.fail("pde solves decrease at theta=" + fmt(theta) + "; ");
    prev_jvp = j;
    prev_pde = s;
    jvp << j << ' ';
    pde << s << ' ';
  }
  int dominated = 0, cells = 0;
  for (const auto& tol : tols)
    for (double theta : kThetaGrid) {
      ++cells;
      if (g2.at({tol.eps_R, tol.eps_g}).at(theta).counters.forward_solves >=
          g1.at({tol.eps_R, tol.eps_g}).at(theta).counters.forward_solves)
        ++dominated;
    }
  if (dominated != cells) v.fail("nu=0.01 cheaper than nu=0.1 at " + std::to_string(cells - dominated) + " cells; ");
  v.detail << "nu=0.1 eps_g=1e-6 jvp: " << jvp.str() << "| pde: " << pde.str() << "| nu=0.01 >= nu=0.1 at "
           << dominated << "/" << cells << " cells";
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  const EllipticProblem e(assemble_elliptic(4));
  const Eigen::MatrixXd Ge = dense_jacobian_oracle(e, Vector::Ones(e.dims().n));
  const Eigen::MatrixXd Ee = dense_elliptic_jacobian(e.instance());
  const double err_e = (Ge - Ee).cwiseAbs().maxCoeff();

  const BurgersProblem b(assemble_burgers(3, 3, 0.1));
  std::mt19937_64 rng(303);
  const Vector u = random_vector(b.dims().n, rng, 0.5);
  EvalContext ctx;
  const Eigen::MatrixXd Gb = dense_jacobian_oracle(b, u);
  const Eigen::MatrixXd Eb = dense_burgers_jacobian(b, b.solve_state(u, ctx));
  const double err_b = (Gb - Eb).cwiseAbs().maxCoeff();

  double err_s = 0.0;
  for (int t = 0; t < 40; ++t) {
    const Index n = 5 + t % 16;
    const Eigen::MatrixXd H = random_psd(n, rng, std::pow(10.0, t % 3));
    const Vector g = random_vector(n, rng);
    const double gamma = std::pow(10.0, -(t % 3));
    SubproblemSpec spec{g, dense_operator(H), gamma, 0.0, spectral_norm_sym(H)};
    const Vector s = exact_step(spec).s;
    const Vector ref = (H + gamma * Eigen::MatrixXd::Identity(n, n)).llt().solve(-g);
    err_s = std::max(err_s, (s - ref).norm() / ref.norm());
  }
  if (!(err_e <= 1e-9)) v.fail("elliptic dense mismatch; ");
  if (!(err_b <= 1e-9)) v.fail("burgers dense mismatch; ");
  if (!(err_s <= 1e-10)) v.fail("exact step mismatch; ");
  v.detail << "elliptic N=4 " << fmt(err_e) << ", burgers 3x3 " << fmt(err_b) << ", exact step " << fmt(err_s);
  return v;
}

Verdict theta_consistency() {
  Verdict v;
  double worst = 0.0;
  auto compare = [&](const std::string& label, const ImplicitProblem& p, double eps_R, double eps_g) {
    std::vector<Vector> a, b;
    const Vector u0 = Vector::Ones(p.dims().n);
    auto collect = [](std::vector<Vector>& into) {
      return [&into](const SolverState& st, const SubproblemSpec&, const StepResult&) { into.push_back(st.u); };
    };
    const SolveOutcome oa = tracked_solve(label + " theta=0", p, u0, config(0.0, eps_R, eps_g), collect(a));
    const SolveOutcome ob = tracked_solve(label + " theta=1e-14", p, u0, config(1e-14, eps_R, eps_g), collect(b));
    a.push_back(oa.state.u);
    b.push_back(ob.state.u);
    if (a.size() != b.size()) {
      v.fail(label + " iteration counts differ; ");
      return;
    }
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k] - b[k]).norm() / a[k].norm());
  };
  const EllipticProblem z0(assemble_elliptic(10, 1e-3, DesiredState::zero));
  compare("elliptic-z0", z0, 1e-6, 1e-4);
  const EllipticProblem z1(assemble_elliptic(10, 1e-3, DesiredState::one));
  compare("elliptic-z1", z1, 1e-2, 1e-6);
  if (!(worst <= 1e-6)) v.fail("iterates diverge; ");
  v.detail << "max relative iterate difference " << fmt(worst);
  return v;
}

Verdict solver_dynamics() {
  Verdict v;
  if (g_dynamics.violations > 0) v.fail(std::to_string(g_dynamics.violations) + " violations, first: " + g_dynamics.first + "; ");
  v.detail << g_dynamics.runs << " runs, " << g_dynamics.iterations << " iterations checked";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Verdict()> run;
  };
  // dynamics (4) is evaluated last over every run the other criteria made
  const std::vector<Criterion> criteria{
      {1, "gradient vs finite differences", 10.0, gradient_correctness},
      {2, "adjoint identity", 5.0, adjoint_identity},
      {3, "decrease, step, residual and CG bounds along solver runs", 60.0, step_bounds_along_runs},
      {5, "elliptic Gauss-Newton never rejects", 60.0, elliptic_no_rejections},
      {6, "elliptic table trends at N=20", 120.0, elliptic_tables},
      {7, "burgers table trends at 16x16", 300.0, burgers_tables},
      {8, "dense oracle equivalence", 10.0, oracle_equivalence},
      {9, "theta=1e-14 reproduces theta=0", 30.0, theta_consistency},
      {4, "solver dynamics over all runs", 1e9, solver_dynamics},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what() + "; ");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) v.fail("over time budget; ");
    if (!v.pass) ++failures;
    std::printf("%s criterion %d: %s (%s; %.2fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
