#pragma once

#include <cstdint>

#include "icls/core.hpp"

namespace icls {

enum class StepMode { exact, inexact };

/// Regularised quadratic model around u_k:
///   m(u_k + s) = 1/2 ||R_k||^2 + g^T s + 1/2 s^T (H + gamma I) s.
struct SubproblemSpec {
  Vector g;
  LinearOperator H;  // symmetric positive semidefinite, n x n
  double gamma = 1.0;
  double theta = 0.0;
  double h_norm_estimate = 0.0;  // upper estimate of ||H||
};

struct StepResult {
  Vector s;
  double model_decrease = 0.0;  // m(u_k) - m(u_k + s)
  double residual_norm = 0.0;   // ||(H + gamma I) s + g||, recursively updated
  double tolerance = 0.0;       // residual target the iteration aimed for
  int cg_iters = 0;
  bool converged = true;
  StepMode mode = StepMode::exact;
};

/// Seed of the power-iteration start vector.
inline constexpr std::uint64_t kDefaultNormSeed = 20240607;

void validate(const SubproblemSpec& spec);

/// Solves (H + gamma I) s = -g to near machine precision by CG.
StepResult exact_step(const SubproblemSpec& spec);

/// CG from s = 0, stopped once
///   ||(H + gamma I) s + g|| <= theta sqrt(gamma / (h_norm_estimate + gamma)) ||g||.
StepResult truncated_cg_step(const SubproblemSpec& spec);

/// Chooses exact_step for theta == 0, truncated_cg_step otherwise.
StepResult compute_step(const SubproblemSpec& spec);

/// Power iteration (30 products, Rayleigh quotient) scaled by 1.5. Returns 0
/// when H annihilates the start vector.
double estimate_operator_norm(const LinearOperator& H, Index dim,
                              std::uint64_t seed = kDefaultNormSeed);

/// -g^T s - 1/2 s^T (H + gamma I) s. One product with H.
double model_decrease(const SubproblemSpec& spec, const Vector& s);

/// ceil(1/2 sqrt(kappa) ln(2 kappa / theta)) capped at n, kappa = (h_norm + gamma) / gamma.
/// Returns n for theta == 0.
std::int64_t cg_iteration_bound(Index n, double h_norm, double gamma, double theta);

}  // namespace icls
