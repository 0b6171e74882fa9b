#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icls/core.hpp"
#include "icls/elliptic.hpp"
#include "icls/solver.hpp"

namespace icls {

struct ProblemParams {
  std::string type = "elliptic";  // elliptic | burgers
  // elliptic
  int n_mesh = 20;
  double lambda = 1e-3;
  DesiredState z = DesiredState::zero;
  // burgers
  int nx = 16;
  int nt = 16;
  double nu = 0.1;
  double omega = 0.05;
};

std::unique_ptr<ImplicitProblem> make_problem(const ProblemParams& params);

/// Elliptic runs start from the all-ones control, Burgers runs from zero.
Vector default_initial_control(const ProblemParams& params, Index n);

std::string problem_id(const ProblemParams& params);

struct TolerancePair {
  double eps_R = 1e-6;
  double eps_g = 1e-4;
};

struct ExperimentSpec {
  ProblemParams problem;
  std::vector<double> theta_grid{0.0, 1e-6, 1e-4, 1e-2, 1e-1, 5e-1};
  std::vector<TolerancePair> tolerances;
  int max_iter = 300;
  HessianMode hessian_mode = HessianMode::gauss_newton;
  double eta = 0.1;
  double gamma_min = 1e-10;
  std::uint64_t seed = kDefaultNormSeed;
  std::string out_dir;  // empty: nothing written
  bool write_traces = true;
  bool record_wall_time = true;  // false writes wall_ms = 0 for byte-stable output

  void validate() const;
};

/// Tolerance rows used by the reference experiments for each problem family.
std::vector<TolerancePair> default_tolerances(const ProblemParams& params);
ExperimentSpec default_experiment(const ProblemParams& params);

/// Parses the JSON grid file format (see README).
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);

struct ExperimentRow {
  std::string problem;
  double theta = 0.0;
  double eps_R = 0.0;
  double eps_g = 0.0;
  std::string status;  // a SolveStatus name, or "error"
  int iterations = 0;
  int successes = 0;
  std::int64_t pde_solves = 0;
  std::int64_t adjoint_solves = 0;
  std::int64_t jvp = 0;
  std::int64_t cg_iters = 0;
  double final_residual_norm = 0.0;
  double final_scaled_gradient = 0.0;
  double wall_ms = 0.0;
  std::string error;

  bool failed() const { return status == "error"; }
  bool converged() const { return status == "converged_residual" || status == "converged_scaled_gradient"; }
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<std::vector<IterationTrace>> traces;  // parallel to rows
  bool all_completed() const;
};

/// One solver run per (tolerance pair, theta) cell, each with fresh counters.
/// Cells run in parallel; rows come back in grid order. Writes summary.csv,
/// table_pde_solves.csv, table_jvp.csv and traces/*.jsonl when out_dir is set.
ExperimentReport run_experiment(const ExperimentSpec& spec);

ExperimentRow make_row(const std::string& problem, double theta, const TolerancePair& tol,
                       const SolveOutcome& outcome);

std::string format_number(double v);
std::string summary_csv_header();
std::string render_summary_csv(const std::vector<ExperimentRow>& rows);

enum class TableMetric { pde_solves, jacobian_applies };

/// One row per (eps_R, eps_g) pair, one column per theta; "-" marks
/// budget-exhausted cells.
std::string render_table(const std::vector<ExperimentRow>& rows, TableMetric metric);

std::string trace_to_json(const IterationTrace& rec);

/// Central differences of 1/2 ||R(y(u),u)||^2, coordinate by coordinate.
Vector fd_gradient_oracle(const ImplicitProblem& problem, const Vector& u, double step);

/// Reduced Jacobian assembled column by column from products with basis vectors.
Eigen::MatrixXd dense_jacobian_oracle(const ImplicitProblem& problem, const Vector& u,
                                      Index max_entries = 10000);

}  // namespace icls
