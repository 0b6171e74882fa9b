#include "icls/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <sstream>

#include "icls/kernels.hpp"

namespace icls {

namespace {

std::span<const double> cview(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mview(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double tolerance_factor(const SubproblemSpec& spec) {
  return std::sqrt(spec.gamma / (spec.h_norm_estimate + spec.gamma));
}

// CG on (H + gamma I) s = -g from s = 0 until ||r|| <= tol.
StepResult run_cg(const SubproblemSpec& spec, double tol, StepMode mode) {
  const Index n = spec.g.size();
  StepResult out;
  out.mode = mode;
  out.tolerance = tol;
  out.s = Vector::Zero(n);

  Vector r = -spec.g;
  Vector p = r;
  double rr = kernels::dot(cview(r), cview(r));
  const int max_iters = static_cast<int>(10 * n + 100);

  while (std::sqrt(rr) > tol) {
    if (out.cg_iters >= max_iters) {
      out.converged = false;
      break;
    }
    Vector q = spec.H.apply(p);
    kernels::axpy(spec.gamma, cview(p), mview(q));
    const double curvature = kernels::dot(cview(p), cview(q));
    if (!(curvature > 0.0)) {
      std::ostringstream msg;
      msg << "CG breakdown: non-positive curvature " << curvature << " at iteration "
          << out.cg_iters << ", residual " << std::sqrt(rr);
      throw SolveError(msg.str());
    }
    const double alpha = rr / curvature;
    kernels::axpy(alpha, cview(p), mview(out.s));
    kernels::axpy(-alpha, cview(q), mview(r));
    ++out.cg_iters;
    const double rr_next = kernels::dot(cview(r), cview(r));
    kernels::xpby(cview(r), rr_next / rr, mview(p));
    rr = rr_next;
  }

  out.residual_norm = std::sqrt(rr);
  // r = -g - (H + gamma I) s, so s^T (H + gamma I) s = -g^T s - r^T s.
  out.model_decrease = -0.5 * kernels::dot(cview(spec.g), cview(out.s)) +
                       0.5 * kernels::dot(cview(out.s), cview(r));
  return out;
}

}  // namespace

void validate(const SubproblemSpec& spec) {
  if (!(spec.gamma > 0.0)) throw ContractError("subproblem: gamma must be positive");
  if (!(spec.theta >= 0.0 && spec.theta < 1.0)) throw ContractError("subproblem: theta must lie in [0,1)");
  if (!(spec.h_norm_estimate >= 0.0)) throw ContractError("subproblem: negative norm estimate");
  require_dim(spec.H.rows(), spec.g.size(), "subproblem H rows");
  require_dim(spec.H.cols(), spec.g.size(), "subproblem H cols");
}

StepResult exact_step(const SubproblemSpec& spec) {
  validate(spec);
  const double rel = std::min(1e-12, 1e-10 * tolerance_factor(spec));
  return run_cg(spec, rel * norm(spec.g), StepMode::exact);
}

StepResult truncated_cg_step(const SubproblemSpec& spec) {
  validate(spec);
  if (!(spec.theta > 0.0)) throw ContractError("truncated_cg_step: theta must be positive");
  return run_cg(spec, spec.theta * tolerance_factor(spec) * norm(spec.g), StepMode::inexact);
}

StepResult compute_step(const SubproblemSpec& spec) {
  return spec.theta == 0.0 ? exact_step(spec) : truncated_cg_step(spec);
}

double estimate_operator_norm(const LinearOperator& H, Index dim, std::uint64_t seed) {
  require_dim(H.rows(), dim, "estimate_operator_norm");
  if (dim == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
  v /= norm(v);

  double rayleigh = 0.0;
  for (int it = 0; it < 30; ++it) {
    const Vector w = H.apply(v);
    const double wn = norm(w);
    if (it == 0 && wn <= 1e-300) return 0.0;
    rayleigh = inner_product(v, w);
    if (wn == 0.0) break;
    v = w / wn;
  }
  return 1.5 * std::max(rayleigh, 0.0);
}

double model_decrease(const SubproblemSpec& spec, const Vector& s) {
  require_dim(s.size(), spec.g.size(), "model_decrease");
  const Vector hs = spec.H.apply(s);
  return -inner_product(spec.g, s) - 0.5 * (inner_product(s, hs) + spec.gamma * inner_product(s, s));
}

std::int64_t cg_iteration_bound(Index n, double h_norm, double gamma, double theta) {
  if (theta <= 0.0) return n;
  const double kappa = (h_norm + gamma) / gamma;
  const double bound = std::ceil(0.5 * std::sqrt(kappa) * std::log(2.0 * kappa / theta));
  return std::min<std::int64_t>(n, static_cast<std::int64_t>(std::max(bound, 0.0)));
}

}  // namespace icls
