#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icls/core.hpp"
#include "icls/subproblem.hpp"

namespace icls {

enum class HessianMode { zero, gauss_newton };
enum class SolveStatus { converged_residual, converged_scaled_gradient, budget_exhausted };

std::string to_string(HessianMode mode);
std::string to_string(SolveStatus status);
HessianMode parse_hessian_mode(const std::string& text);

struct SolverConfig {
  double eta = 0.1;
  /// Unset means max{1, ||g_0||, ||u_0||_inf + 1}.
  std::optional<double> gamma0;
  double gamma_min = 1e-10;
  double theta = 0.0;
  double eps_R = 1e-6;
  double eps_g = 1e-4;
  int max_iter = 300;
  HessianMode hessian_mode = HessianMode::gauss_newton;
  std::uint64_t norm_seed = kDefaultNormSeed;

  void validate() const;
};

struct SolverState {
  int k = 0;
  Vector u;
  Vector y;
  Vector R;
  Vector g;
  double gamma = 1.0;
  EvalCounters counters;
};

struct IterationTrace {
  int k = 0;
  double gamma = 0.0;
  double residual_norm = 0.0;
  double gradient_norm = 0.0;
  double scaled_gradient = 0.0;
  double step_norm = 0.0;
  double model_decrease = 0.0;
  double actual_decrease = 0.0;
  double rho = 0.0;
  bool success = false;
  int cg_iters = 0;
  bool cg_converged = true;
  double h_norm_estimate = 0.0;
  std::string warning;
  EvalCounters counters;  // snapshot after the iteration
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::budget_exhausted;
  SolverState state;
  std::vector<IterationTrace> trace;
  EvalCounters counters;

  int iterations() const { return static_cast<int>(trace.size()); }
  int successes() const;
};

using TraceSink = std::function<void(const IterationTrace&)>;

/// Called after each step computation with the pre-step state (u_k, y_k, R_k,
/// g_k, gamma_k), the subproblem and its result. Intended for test-time checks.
using StepObserver =
    std::function<void(const SolverState&, const SubproblemSpec&, const StepResult&)>;

double default_gamma0(const Vector& g0, const Vector& u0);

enum class StopCheck { proceed, converged_residual, converged_scaled_gradient };
StopCheck stopping_check(const Vector& R, const Vector& g, double eps_R, double eps_g);

/// actual / predicted; throws ContractError if predicted <= 0.
double ratio(double actual_decrease, double predicted_decrease);

/// Regularisation method: model step, trial constraint solve, ratio test,
/// gamma halves on success (floored at gamma_min) and doubles on failure.
SolveOutcome solve(const ImplicitProblem& problem, const Vector& u0, const SolverConfig& config,
                   const TraceSink& sink = {}, const StepObserver& observer = {});

}  // namespace icls
