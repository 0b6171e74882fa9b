#include "icls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "icls/adjoint.hpp"
#include "icls/burgers.hpp"

namespace icls {

using nlohmann::json;

std::unique_ptr<ImplicitProblem> make_problem(const ProblemParams& params) {
  if (params.type == "elliptic")
    return std::make_unique<EllipticProblem>(assemble_elliptic(params.n_mesh, params.lambda, params.z));
  if (params.type == "burgers")
    return std::make_unique<BurgersProblem>(assemble_burgers(params.nx, params.nt, params.nu, params.omega));
  throw ContractError("unknown problem type '" + params.type + "'");
}

Vector default_initial_control(const ProblemParams& params, Index n) {
  return params.type == "elliptic" ? Vector::Ones(n) : Vector::Zero(n);
}

std::string problem_id(const ProblemParams& params) {
  std::ostringstream s;
  if (params.type == "elliptic")
    s << "elliptic-N" << params.n_mesh << "-z" << (params.z == DesiredState::zero ? 0 : 1);
  else
    s << "burgers-nx" << params.nx << "-nt" << params.nt << "-nu" << format_number(params.nu);
  return s.str();
}

void ExperimentSpec::validate() const {
  if (theta_grid.empty()) throw ContractError("experiment: empty theta grid");
  if (tolerances.empty()) throw ContractError("experiment: empty tolerance grid");
  for (double t : theta_grid)
    if (!(t >= 0.0 && t < 1.0)) throw ContractError("experiment: theta outside [0,1)");
  for (const auto& tol : tolerances)
    if (!(tol.eps_R > 0.0 && tol.eps_g > 0.0)) throw ContractError("experiment: tolerances must be positive");
  if (max_iter < 0) throw ContractError("experiment: negative max_iter");
  if (problem.type != "elliptic" && problem.type != "burgers")
    throw ContractError("experiment: unknown problem type '" + problem.type + "'");
}

std::vector<TolerancePair> default_tolerances(const ProblemParams& params) {
  if (params.type == "elliptic" && params.z == DesiredState::zero) return {{1e-3, 1e-4}, {1e-6, 1e-4}, {1e-9, 1e-4}};
  if (params.type == "elliptic") return {{1e-2, 1e-4}, {1e-2, 1e-6}, {1e-2, 1e-8}};
  return {{1e-2, 1e-3}, {1e-2, 1e-4}, {1e-2, 1e-6}};
}

ExperimentSpec default_experiment(const ProblemParams& params) {
  ExperimentSpec spec;
  spec.problem = params;
  spec.tolerances = default_tolerances(params);
  return spec;
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  const json doc = json::parse(json_text);
  ExperimentSpec spec;
  if (doc.contains("problem")) {
    const json& p = doc.at("problem");
    ProblemParams& pp = spec.problem;
    pp.type = p.value("type", pp.type);
    pp.n_mesh = p.value("n_mesh", pp.n_mesh);
    pp.lambda = p.value("lambda", pp.lambda);
    if (p.contains("z")) pp.z = parse_desired_state(p.at("z").get<std::string>());
    pp.nx = p.value("nx", pp.nx);
    pp.nt = p.value("nt", pp.nt);
    pp.nu = p.value("nu", pp.nu);
    pp.omega = p.value("omega", pp.omega);
  }
  spec.tolerances = default_tolerances(spec.problem);
  if (doc.contains("theta_grid")) spec.theta_grid = doc.at("theta_grid").get<std::vector<double>>();
  if (doc.contains("tolerances")) {
    spec.tolerances.clear();
    for (const json& pair : doc.at("tolerances")) {
      if (!pair.is_array() || pair.size() != 2) throw ContractError("experiment: tolerances must be [eps_r, eps_g] pairs");
      spec.tolerances.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  }
  spec.max_iter = doc.value("max_iter", spec.max_iter);
  if (doc.contains("hessian")) spec.hessian_mode = parse_hessian_mode(doc.at("hessian").get<std::string>());
  spec.eta = doc.value("eta", spec.eta);
  spec.gamma_min = doc.value("gamma_min", spec.gamma_min);
  spec.seed = doc.value("seed", spec.seed);
  spec.write_traces = doc.value("write_traces", spec.write_traces);
  spec.record_wall_time = doc.value("record_wall_time", spec.record_wall_time);
  spec.out_dir = doc.value("out_dir", spec.out_dir);
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open grid file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str());
}

bool ExperimentReport::all_completed() const {
  for (const auto& r : rows)
    if (r.failed()) return false;
  return true;
}

ExperimentRow make_row(const std::string& problem, double theta, const TolerancePair& tol,
                       const SolveOutcome& outcome) {
  ExperimentRow row;
  row.problem = problem;
  row.theta = theta;
  row.eps_R = tol.eps_R;
  row.eps_g = tol.eps_g;
  row.status = to_string(outcome.status);
  row.iterations = outcome.iterations();
  row.successes = outcome.successes();
  row.pde_solves = outcome.counters.forward_solves;
  row.adjoint_solves = outcome.counters.adjoint_solves;
  row.jvp = outcome.counters.jacobian_applies;
  row.cg_iters = outcome.counters.cg_iterations;
  row.final_residual_norm = norm(outcome.state.R);
  row.final_scaled_gradient = norm(outcome.state.g) / row.final_residual_norm;
  return row;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string summary_csv_header() {
  return "problem,theta,eps_r,eps_g,status,iterations,successes,pde_solves,adjoint_solves,jvp,cg_iters,"
         "final_residual_norm,final_scaled_gradient,wall_ms";
}

std::string render_summary_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << summary_csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.problem << ',' << format_number(r.theta) << ',' << format_number(r.eps_R) << ','
        << format_number(r.eps_g) << ',' << r.status << ',' << r.iterations << ',' << r.successes << ','
        << r.pde_solves << ',' << r.adjoint_solves << ',' << r.jvp << ',' << r.cg_iters << ','
        << format_number(r.final_residual_norm) << ',' << format_number(r.final_scaled_gradient) << ','
        << format_number(r.wall_ms) << '\n';
  }
  return out.str();
}

std::string render_table(const std::vector<ExperimentRow>& rows, TableMetric metric) {
  std::vector<double> thetas;
  std::vector<std::pair<double, double>> pairs;
  for (const auto& r : rows) {
    if (std::find(thetas.begin(), thetas.end(), r.theta) == thetas.end()) thetas.push_back(r.theta);
    const std::pair<double, double> key{r.eps_R, r.eps_g};
    if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
  }

  std::ostringstream out;
  if (metric == TableMetric::pde_solves)
    out << "# metric=pde_solves: constraint solves including the one at u0\n";
  else
    out << "# metric=jvp: every product with the reduced Jacobian or its transpose "
           "(one Gauss-Newton product counts 2)\n";
  out << "eps_r,eps_g";
  for (double t : thetas) out << ',' << format_number(t);
  out << '\n';
  for (const auto& [eps_r, eps_g] : pairs) {
    out << format_number(eps_r) << ',' << format_number(eps_g);
    for (double t : thetas) {
      out << ',';
      auto it = std::find_if(rows.begin(), rows.end(), [&](const ExperimentRow& r) {
        return r.theta == t && r.eps_R == eps_r && r.eps_g == eps_g;
      });
      if (it == rows.end()) continue;
      if (it->failed())
        out << "error";
      else if (it->status == "budget_exhausted")
        out << '-';
      else
        out << (metric == TableMetric::pde_solves ? it->pde_solves : it->jvp);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

json counters_json(const EvalCounters& c) {
  return json{{"forward_solves", c.forward_solves},     {"adjoint_solves", c.adjoint_solves},
              {"linearized_solves", c.linearized_solves}, {"jacobian_applies", c.jacobian_applies},
              {"cg_iterations", c.cg_iterations},         {"norm_estimate_applies", c.norm_estimate_applies}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string trace_to_json(const IterationTrace& rec) {
  json j{{"k", rec.k},
         {"gamma", rec.gamma},
         {"residual_norm", rec.residual_norm},
         {"gradient_norm", rec.gradient_norm},
         {"scaled_gradient", rec.scaled_gradient},
         {"step_norm", rec.step_norm},
         {"model_decrease", rec.model_decrease},
         {"actual_decrease", rec.actual_decrease},
         {"rho", rec.rho},
         {"success", rec.success},
         {"cg_iters", rec.cg_iters},
         {"cg_converged", rec.cg_converged},
         {"h_norm_estimate", rec.h_norm_estimate},
         {"counters", counters_json(rec.counters)}};
  if (!rec.warning.empty()) j["warning"] = rec.warning;
  return j.dump();
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::unique_ptr<ImplicitProblem> problem = make_problem(spec.problem);
  const std::string id = problem_id(spec.problem);
  const Vector u0 = default_initial_control(spec.problem, problem->dims().n);

  struct Cell {
    double theta;
    TolerancePair tol;
  };
  std::vector<Cell> cells;
  for (const auto& tol : spec.tolerances)
    for (double t : spec.theta_grid) cells.push_back({t, tol});

  ExperimentReport report;
  report.rows.resize(cells.size());
  report.traces.resize(cells.size());

  const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    SolverConfig cfg;
    cfg.eta = spec.eta;
    cfg.gamma_min = spec.gamma_min;
    cfg.theta = cell.theta;
    cfg.eps_R = cell.tol.eps_R;
    cfg.eps_g = cell.tol.eps_g;
    cfg.max_iter = spec.max_iter;
    cfg.hessian_mode = spec.hessian_mode;
    cfg.norm_seed = spec.seed;

    ExperimentRow& row = report.rows[static_cast<std::size_t>(i)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SolveOutcome outcome = solve(*problem, u0, cfg);
      row = make_row(id, cell.theta, cell.tol, outcome);
      report.traces[static_cast<std::size_t>(i)] = outcome.trace;
    } catch (const std::exception& e) {
      row = ExperimentRow{};
      row.problem = id;
      row.theta = cell.theta;
      row.eps_R = cell.tol.eps_R;
      row.eps_g = cell.tol.eps_g;
      row.status = "error";
      row.error = e.what();
    }
    if (spec.record_wall_time)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }

  if (!spec.out_dir.empty()) {
    const std::filesystem::path dir(spec.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "summary.csv", render_summary_csv(report.rows));
    write_file(dir / "table_pde_solves.csv", render_table(report.rows, TableMetric::pde_solves));
    write_file(dir / "table_jvp.csv", render_table(report.rows, TableMetric::jacobian_applies));
    if (spec.write_traces) {
      std::filesystem::create_directories(dir / "traces");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::ostringstream name;
        name << id << "_theta" << format_number(cells[i].theta) << "_epsr" << format_number(cells[i].tol.eps_R)
             << "_epsg" << format_number(cells[i].tol.eps_g) << ".jsonl";
        std::string text;
        for (const auto& rec : report.traces[i]) text += trace_to_json(rec) + '\n';
        write_file(dir / "traces" / name.str(), text);
      }
    }
  }
  return report;
}

Vector fd_gradient_oracle(const ImplicitProblem& problem, const Vector& u, double step) {
  if (!(step > 0.0)) throw ContractError("fd_gradient_oracle: step must be positive");
  require_dim(u.size(), problem.dims().n, "fd_gradient_oracle");
  EvalContext ctx;
  auto reduced_objective = [&](const Vector& v) { return objective(problem, problem.solve_state(v, ctx), v); };
  Vector g(u.size());
  Vector probe = u;
  for (Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + step;
    const double plus = reduced_objective(probe);
    probe[i] = u[i] - step;
    const double minus = reduced_objective(probe);
    probe[i] = u[i];
    g[i] = (plus - minus) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd dense_jacobian_oracle(const ImplicitProblem& problem, const Vector& u, Index max_entries) {
  const ProblemDims d = problem.dims();
  require_dim(u.size(), d.n, "dense_jacobian_oracle");
  if (d.n * d.m > max_entries) throw ContractError("dense_jacobian_oracle: problem too large for dense assembly");
  EvalContext ctx;
  const ReducedJacobian jac(problem, u, problem.solve_state(u, ctx), ctx);
  Eigen::MatrixXd G(d.m, d.n);
  for (Index j = 0; j < d.n; ++j) G.col(j) = jac.apply(Vector::Unit(d.n, j));
  return G;
}

}  // namespace icls
