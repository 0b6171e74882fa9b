#include "icls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "icls/adjoint.hpp"

namespace icls {

std::string to_string(HessianMode mode) {
  return mode == HessianMode::zero ? "zero" : "gauss-newton";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged_residual:
      return "converged_residual";
    case SolveStatus::converged_scaled_gradient:
      return "converged_scaled_gradient";
    case SolveStatus::budget_exhausted:
      return "budget_exhausted";
  }
  return "unknown";
}

HessianMode parse_hessian_mode(const std::string& text) {
  if (text == "zero") return HessianMode::zero;
  if (text == "gauss-newton" || text == "gauss_newton") return HessianMode::gauss_newton;
  throw ContractError("unknown hessian mode '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw ContractError("eta must lie in (0,1)");
  if (!(gamma_min > 0.0)) throw ContractError("gamma_min must be positive");
  if (gamma0 && !(*gamma0 >= gamma_min)) throw ContractError("gamma0 must be >= gamma_min");
  if (!(theta >= 0.0 && theta < 1.0)) throw ContractError("theta must lie in [0,1)");
  if (!(eps_R > 0.0)) throw ContractError("eps_R must be positive");
  if (!(eps_g > 0.0)) throw ContractError("eps_g must be positive");
  if (max_iter < 0) throw ContractError("max_iter must be non-negative");
}

int SolveOutcome::successes() const {
  return static_cast<int>(std::count_if(trace.begin(), trace.end(),
                                        [](const IterationTrace& t) { return t.success; }));
}

double default_gamma0(const Vector& g0, const Vector& u0) {
  const double u_inf = u0.size() == 0 ? 0.0 : u0.cwiseAbs().maxCoeff();
  return std::max({1.0, norm(g0), u_inf + 1.0});
}

StopCheck stopping_check(const Vector& R, const Vector& g, double eps_R, double eps_g) {
  const double r_norm = norm(R);
  if (r_norm <= eps_R) return StopCheck::converged_residual;
  if (norm(g) / r_norm <= eps_g) return StopCheck::converged_scaled_gradient;
  return StopCheck::proceed;
}

double ratio(double actual_decrease, double predicted_decrease) {
  if (!(predicted_decrease > 0.0))
    throw ContractError("ratio: predicted decrease must be positive");
  return actual_decrease / predicted_decrease;
}

SolveOutcome solve(const ImplicitProblem& problem, const Vector& u0, const SolverConfig& config,
                   const TraceSink& sink, const StepObserver& observer) {
  config.validate();
  const ProblemDims dims = problem.dims();
  require_dim(u0.size(), dims.n, "solve(u0)");
  if (!u0.allFinite()) throw ContractError("solve: u0 has non-finite entries");

  EvalContext ctx;
  SolveOutcome out;
  SolverState& st = out.state;

  st.u = u0;
  st.y = problem.solve_state(st.u, ctx);
  st.R = problem.residual(st.y, st.u);
  double J = 0.5 * inner_product(st.R, st.R);
  auto jac = std::make_unique<ReducedJacobian>(problem, st.u, st.y, ctx);
  st.g = jac->gradient(st.R);
  st.gamma = config.gamma0.value_or(default_gamma0(st.g, st.u));
  if (st.gamma < config.gamma_min) throw ContractError("solve: gamma0 below gamma_min");

  const Index n = dims.n;
  const LinearOperator zero_op(
      n, n, [n](const Vector&) { return Vector(Vector::Zero(n)); },
      [n](const Vector&) { return Vector(Vector::Zero(n)); });
  double h_norm = 0.0;
  bool h_norm_valid = false;  // reset whenever u_k changes

  for (st.k = 0;; ++st.k) {
    const StopCheck stop = stopping_check(st.R, st.g, config.eps_R, config.eps_g);
    if (stop == StopCheck::converged_residual) {
      out.status = SolveStatus::converged_residual;
      break;
    }
    if (stop == StopCheck::converged_scaled_gradient) {
      out.status = SolveStatus::converged_scaled_gradient;
      break;
    }
    if (st.k >= config.max_iter) {
      out.status = SolveStatus::budget_exhausted;
      break;
    }

    SubproblemSpec spec;
    spec.g = st.g;
    spec.gamma = st.gamma;
    spec.theta = config.theta;
    if (config.hessian_mode == HessianMode::zero) {
      spec.H = zero_op;
      spec.h_norm_estimate = 0.0;
    } else {
      spec.H = jac->gauss_newton();
      if (!h_norm_valid) {
        EvalContext aux;
        const ReducedJacobian probe(problem, st.u, st.y, aux);
        h_norm = estimate_operator_norm(probe.gauss_newton(), n, config.norm_seed);
        h_norm_valid = true;
        ctx.counters.norm_estimate_applies += aux.counters.jacobian_applies;
      }
      spec.h_norm_estimate = h_norm;
    }

    const StepResult step = compute_step(spec);
    ctx.counters.cg_iterations += step.cg_iters;
    if (observer) {
      st.counters = ctx.counters;
      observer(st, spec, step);
    }

    Vector u_trial = st.u + step.s;
    Vector y_trial = problem.solve_state(u_trial, ctx);
    Vector R_trial = problem.residual(y_trial, u_trial);
    const double J_trial = 0.5 * inner_product(R_trial, R_trial);

    IterationTrace rec;
    rec.k = st.k;
    rec.gamma = st.gamma;
    rec.residual_norm = norm(st.R);
    rec.gradient_norm = norm(st.g);
    rec.scaled_gradient = rec.gradient_norm / rec.residual_norm;
    rec.step_norm = norm(step.s);
    rec.model_decrease = step.model_decrease;
    rec.actual_decrease = J - J_trial;
    rec.cg_iters = step.cg_iters;
    rec.cg_converged = step.converged;
    rec.h_norm_estimate = spec.h_norm_estimate;
    if (!step.converged) rec.warning = "cg iteration cap reached";

    if (step.model_decrease > 0.0) {
      rec.rho = ratio(rec.actual_decrease, step.model_decrease);
      rec.success = rec.rho >= config.eta;
    } else {
      rec.rho = 0.0;
      rec.success = false;
      rec.warning = "predicted decrease underflow";
    }

    if (rec.success) {
      st.u = std::move(u_trial);
      st.y = std::move(y_trial);
      st.R = std::move(R_trial);
      J = J_trial;
      st.gamma = std::max(0.5 * st.gamma, config.gamma_min);
      jac = std::make_unique<ReducedJacobian>(problem, st.u, st.y, ctx);
      st.g = jac->gradient(st.R);
      h_norm_valid = false;
    } else {
      st.gamma *= 2.0;
    }

    rec.counters = ctx.counters;
    if (sink) sink(rec);
    out.trace.push_back(std::move(rec));
  }

  st.counters = ctx.counters;
  out.counters = ctx.counters;
  return out;
}

}  // namespace icls
