// Command-line front end: single solver runs and experiment grids.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "icls/harness.hpp"
#include "icls/solver.hpp"

namespace {

struct ProblemFlags {
  std::string problem = "elliptic";
  std::string z = "zero";
  icls::ProblemParams params;

  void add(CLI::App& app) {
    app.add_option("--problem", problem, "elliptic | burgers")->check(CLI::IsMember({"elliptic", "burgers"}));
    app.add_option("--n-mesh", params.n_mesh, "elliptic: subdivisions per side");
    app.add_option("--lambda", params.lambda, "elliptic: control weight");
    app.add_option("--z", z, "elliptic: desired state")->check(CLI::IsMember({"zero", "one"}));
    app.add_option("--nx", params.nx, "burgers: spatial resolution");
    app.add_option("--nt", params.nt, "burgers: time steps");
    app.add_option("--nu", params.nu, "burgers: viscosity");
    app.add_option("--omega", params.omega, "burgers: control weight");
  }

  icls::ProblemParams resolve() const {
    icls::ProblemParams p = params;
    p.type = problem;
    p.z = icls::parse_desired_state(z);
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized Gauss-Newton for implicitly constrained least squares"};
  app.require_subcommand(1);

  // solve
  CLI::App* solve_cmd = app.add_subcommand("solve", "run the solver once and print a summary row");
  ProblemFlags solve_problem;
  solve_problem.add(*solve_cmd);
  icls::SolverConfig cfg;
  std::string hessian = "gauss-newton";
  std::string trace_path;
  solve_cmd->add_option("--theta", cfg.theta, "inexactness in [0,1)");
  solve_cmd->add_option("--eps-r", cfg.eps_R, "residual tolerance");
  solve_cmd->add_option("--eps-g", cfg.eps_g, "scaled gradient tolerance");
  solve_cmd->add_option("--eta", cfg.eta, "acceptance threshold");
  solve_cmd->add_option("--gamma-min", cfg.gamma_min, "regularization floor");
  solve_cmd->add_option("--max-iter", cfg.max_iter, "outer iteration budget");
  solve_cmd->add_option("--hessian", hessian, "zero | gauss-newton")->check(CLI::IsMember({"zero", "gauss-newton"}));
  solve_cmd->add_option("--seed", cfg.norm_seed, "power iteration seed");
  solve_cmd->add_option("--trace", trace_path, "write JSONL iteration trace here");

  // experiment
  CLI::App* exp_cmd = app.add_subcommand("experiment", "run a (theta, eps_r, eps_g) grid and write CSV tables");
  ProblemFlags exp_problem;
  exp_problem.add(*exp_cmd);
  std::string grid_file;
  std::string out_dir = "results";
  std::string exp_hessian = "gauss-newton";
  int exp_max_iter = 300;
  std::uint64_t exp_seed = icls::kDefaultNormSeed;
  bool no_timing = false;
  exp_cmd->add_option("--grid-file", grid_file, "JSON experiment description");
  exp_cmd->add_option("--out-dir", out_dir, "output directory");
  exp_cmd->add_option("--max-iter", exp_max_iter, "outer iteration budget");
  exp_cmd->add_option("--hessian", exp_hessian, "zero | gauss-newton")->check(CLI::IsMember({"zero", "gauss-newton"}));
  exp_cmd->add_option("--seed", exp_seed, "power iteration seed");
  exp_cmd->add_flag("--no-timing", no_timing, "write wall_ms as 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const icls::ProblemParams params = solve_problem.resolve();
      cfg.hessian_mode = icls::parse_hessian_mode(hessian);
      const auto problem = icls::make_problem(params);
      const icls::Vector u0 = icls::default_initial_control(params, problem->dims().n);

      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot open trace file " + trace_path);
      }
      icls::TraceSink sink;
      if (trace.is_open()) sink = [&trace](const icls::IterationTrace& rec) { trace << icls::trace_to_json(rec) << '\n'; };

      const auto t0 = std::chrono::steady_clock::now();
      const icls::SolveOutcome outcome = icls::solve(*problem, u0, cfg, sink);
      icls::ExperimentRow row = icls::make_row(icls::problem_id(params), cfg.theta, {cfg.eps_R, cfg.eps_g}, outcome);
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      std::cout << icls::render_summary_csv({row});
      return 0;
    }

    icls::ExperimentSpec spec;
    if (!grid_file.empty()) {
      spec = icls::load_experiment_spec(grid_file);
    } else {
      spec = icls::default_experiment(exp_problem.resolve());
      spec.max_iter = exp_max_iter;
      spec.hessian_mode = icls::parse_hessian_mode(exp_hessian);
    }
    if (exp_cmd->count("--seed")) spec.seed = exp_seed;
    if (exp_cmd->count("--max-iter")) spec.max_iter = exp_max_iter;
    if (exp_cmd->count("--hessian")) spec.hessian_mode = icls::parse_hessian_mode(exp_hessian);
    if (exp_cmd->count("--out-dir") || spec.out_dir.empty()) spec.out_dir = out_dir;
    if (no_timing) spec.record_wall_time = false;

    const icls::ExperimentReport report = icls::run_experiment(spec);
    std::cout << icls::render_table(report.rows, icls::TableMetric::pde_solves);
    std::cout << icls::render_table(report.rows, icls::TableMetric::jacobian_applies);
    for (const auto& row : report.rows)
      if (row.failed()) std::cerr << "cell theta=" << row.theta << " eps_r=" << row.eps_R << " eps_g=" << row.eps_g
                                  << " failed: " << row.error << '\n';
    return report.all_completed() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
