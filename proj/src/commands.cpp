#include "gclab/commands.hpp"

#include "gclab/error.hpp"
#include "gclab/estimator.hpp"
#include "gclab/io.hpp"
#include "gclab/manufactured.hpp"
#include "gclab/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <set>

namespace gclab {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- config access

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be a JSON object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!known.count(item.key())) throw InputError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw InputError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw InputError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw InputError("");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    throw InputError(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
std::vector<T> list_or(const json& obj, const char* key, std::vector<T> fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_array()) throw InputError(std::string("key '") + key + "' must be an array");
  std::vector<T> out;
  for (const auto& v : *it) {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw InputError(std::string("key '") + key + "' must hold integers");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw InputError(std::string("key '") + key + "' must hold numbers");
    } else {
      if (!v.is_string()) throw InputError(std::string("key '") + key + "' must hold strings");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

json parse_config(const CommandRequest& request) {
  json doc;
  try {
    doc = json::parse(request.config_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.size() != 1 || !doc.contains(request.command))
    throw InputError("config must hold exactly one top-level object named '" + request.command + "'");
  json body = doc.at(request.command);
  if (!body.is_object()) throw InputError("'" + request.command + "' must be a JSON object");
  return body;
}

std::uint64_t resolve_seed(const json& body, const CommandRequest& request) {
  if (request.seed) return *request.seed;
  return value_or<std::uint64_t>(body, "seed", 0);
}

struct Output {
  fs::path dir;

  void write(const std::string& name, const std::string& content) const { write_atomic(dir / name, content); }
  void write_json(const std::string& name, const json& value) const { write(name, value.dump(2) + "\n"); }
};

// ---------------------------------------------------------------- shared pieces

struct ProblemSelection {
  std::string manufactured = "cosh";
  double R = 1.0;
  int n_cells = 64;
  double half_width = 0.0;

  json to_json() const {
    return {{"manufactured", manufactured}, {"R", R}, {"n_cells", n_cells}, {"half_width", half_width > 0 ? half_width : R}};
  }
};

ProblemSelection parse_problem(const json& body) {
  ProblemSelection p;
  p.manufactured = value_or<std::string>(body, "manufactured", p.manufactured);
  p.R = value_or<double>(body, "R", p.R);
  p.n_cells = value_or<int>(body, "n_cells", p.n_cells);
  p.half_width = value_or<double>(body, "half_width", 0.0);
  manufactured(p.manufactured);  // validates the name
  return p;
}

SolverConfig parse_solver(const json& body, std::uint64_t seed) {
  SolverConfig c;
  c.seed = seed;
  const auto it = body.find("solver");
  if (it != body.end() && !it->is_null()) {
    const json& s = *it;
    check_keys(s, {"max_iterations", "residual_tolerance", "max_halvings", "initial_guess", "perturbation_amplitude"},
               "solver");
    c.max_iterations = value_or<int>(s, "max_iterations", c.max_iterations);
    c.residual_tolerance = value_or<double>(s, "residual_tolerance", c.residual_tolerance);
    c.max_halvings = value_or<int>(s, "max_halvings", c.max_halvings);
    c.initial_guess = parse_initial_guess(value_or<std::string>(s, "initial_guess", to_string(c.initial_guess)));
    c.perturbation_amplitude = value_or<double>(s, "perturbation_amplitude", c.perturbation_amplitude);
  }
  c.validate();
  return c;
}

json solver_json(const SolverConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"residual_tolerance", c.residual_tolerance},
          {"max_halvings", c.max_halvings},
          {"convexity_floor", c.convexity_floor},
          {"initial_guess", to_string(c.initial_guess)},
          {"perturbation_amplitude", c.perturbation_amplitude}};
}

json grid_json(const Grid2D& grid) {
  return {{"a", grid.half_width()}, {"n_cells", grid.n_cells()}, {"h", grid.spacing()}};
}

double sup_error(const ScalarField& u, const ProblemSpec& spec) {
  const ScalarField truth = ScalarField::sample(spec.grid, spec.exact->u);
  double e = 0.0;
  for (std::size_t k = 0; k < truth.values().size(); ++k) e = std::max(e, std::abs(u.values()[k] - truth.values()[k]));
  return e;
}

json solution_json(const SolutionState& s, const ProblemSpec& spec) {
  return {{"converged", s.converged},
          {"status", to_string(s.status)},
          {"detail", s.detail},
          {"iterations", s.iterations},
          {"residual_norm", s.residual_norm},
          {"convexity_margin", s.convexity_margin},
          {"sup_error", sup_error(s.u, spec)},
          {"m", spec.m},
          {"M", spec.M}};
}

std::string solver_log(const SolutionState& s) {
  std::string out;
  for (const IterationRecord& r : s.log) {
    const json line = {{"iteration", r.iteration},
                       {"residual", r.residual},
                       {"halvings", r.halvings},
                       {"step", r.step},
                       {"convexity_margin", r.convexity_margin}};
    out += line.dump() + "\n";
  }
  return out;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

// ---------------------------------------------------------------- eigen-check

int cmd_eigen_check(const CommandRequest& request, std::ostream& log) {
  const json body = parse_config(request);
  check_keys(body, {"dimensions", "matrices_per_dimension", "gap_min", "h", "first_tolerance", "second_tolerance", "seed"},
             "eigen-check");
  EigenCheckConfig c;
  c.dimensions = list_or<int>(body, "dimensions", c.dimensions);
  c.matrices = value_or<int>(body, "matrices_per_dimension", c.matrices);
  c.gap_min = value_or<double>(body, "gap_min", c.gap_min);
  c.h = value_or<double>(body, "h", c.h);
  c.first_tolerance = value_or<double>(body, "first_tolerance", c.first_tolerance);
  c.second_tolerance = value_or<double>(body, "second_tolerance", c.second_tolerance);
  c.seed = resolve_seed(body, request);

  const EigenCheckSummary s = eigen_check(c);

  json report;
  report["config"] = {{"dimensions", c.dimensions},   {"matrices_per_dimension", c.matrices},
                      {"gap_min", c.gap_min},         {"h", c.h},
                      {"first_tolerance", c.first_tolerance}, {"second_tolerance", c.second_tolerance},
                      {"seed", c.seed}};
  json dims = json::array();
  for (const auto& d : s.dimensions)
    dims.push_back({{"n", d.n}, {"cases", d.cases}, {"degenerate", d.degenerate}, {"max_first", d.max_first},
                    {"max_second", d.max_second}});
  report["dimensions"] = dims;
  report["cases"] = s.cases;
  report["degenerate_cases"] = s.degenerate_cases;
  report["max_first_discrepancy"] = s.max_first;
  report["max_second_discrepancy"] = s.max_second;
  report["passed"] = s.passed;
  if (s.worst) {
    const EigenCheckCase& w = *s.worst;
    report["worst_case"] = {{"n", w.n},           {"sample", w.sample}, {"k", w.k},
                            {"first", w.first},   {"second", w.second}, {"degenerate", w.degenerate},
                            {"error", w.error},   {"matrix", matrix_json(w.w)}};
  }
  Output{request.out_dir}.write_json("eigen_check.json", report);
  log << "eigen-check: " << s.cases << " cases, max first " << s.max_first << ", max second " << s.max_second
      << ", degenerate " << s.degenerate_cases << (s.passed ? " -> pass" : " -> FAIL") << "\n";
  return static_cast<int>(s.passed ? ExitCode::success : ExitCode::check_failed);
}

// ---------------------------------------------------------------- solve

int cmd_solve(const CommandRequest& request, std::ostream& log) {
  const json body = parse_config(request);
  check_keys(body, {"manufactured", "R", "n_cells", "half_width", "solver", "seed"}, "solve");
  const ProblemSelection sel = parse_problem(body);
  const SolverConfig solver = parse_solver(body, resolve_seed(body, request));
  const ProblemSpec spec = make_problem(manufactured(sel.manufactured), sel.R, sel.n_cells, sel.half_width);
  const SolutionState state = newton_solve(spec, solver);

  const Output out{request.out_dir};
  out.write("solution.csv", field_csv(state.u));
  out.write("solver_log.jsonl", solver_log(state));
  json doc;
  doc["config"] = sel.to_json();
  doc["config"]["solver"] = solver_json(solver);
  doc["config"]["seed"] = solver.seed;
  doc["grid"] = grid_json(spec.grid);
  doc["solution"] = solution_json(state, spec);
  out.write_json("solution.json", doc);
  log << "solve: " << to_string(state.status) << " after " << state.iterations << " iterations, residual "
      << state.residual_norm << "\n";
  if (!state.converged) log << "solve: " << state.detail << "\n";
  return static_cast<int>(state.converged ? ExitCode::success : ExitCode::check_failed);
}

// ---------------------------------------------------------------- estimate

json report_json(const EstimateReport& r) {
  json j;
  j["x0"] = {{"i", r.x0.i}, {"j", r.x0.j}, {"x", {r.x0.x(0), r.x0.x(1)}}, {"rim_adjacent", r.x0.rim_adjacent}};
  j["phi_max"] = r.phi_max;
  j["eta_lambda1_max"] = r.eta_lambda1_max;
  j["tau_origin"] = {r.tau_origin(0), r.tau_origin(1)};
  j["origin_degenerate"] = r.origin_degenerate;
  j["u_tau_tau_origin"] = r.u_tau_tau_origin;
  j["bound_at_origin"] = r.bound_at_origin;
  j["directional_second_derivatives"] = r.directional;
  j["directional_chain_holds"] = r.directional_chain_holds;
  j["origin_chain_holds"] = r.origin_chain_holds;
  j["sigma_nodes"] = r.sigma_nodes;
  j["degenerate_nodes"] = r.degenerate_nodes;
  j["critical_point"] = {{"skipped", r.critical_point.skipped},
                         {"reason", r.critical_point.reason},
                         {"residual", {r.critical_point.residual(0), r.critical_point.residual(1)}}};
  j["identity_residuals"] = r.identity_residuals;
  j["det_second_variation_floor"] = r.det_second_variation_floor;
  j["constants"] = {{"m", r.constants.m},
                    {"M", r.constants.M},
                    {"R", r.constants.R},
                    {"sup_grad_f", r.constants.sup_grad_f},
                    {"sup_hess_f", r.constants.sup_hess_f},
                    {"sup_grad_u", r.constants.sup_grad_u}};
  return j;
}

json aux_json(const AuxiliaryConfig& a) {
  return {{"R", a.R}, {"r_squared", a.r_squared}, {"beta", a.beta}, {"m", a.m},
          {"M", a.M}, {"c0", a.c0},               {"gap_floor", a.gap_floor}};
}

int cmd_estimate(const CommandRequest& request, std::ostream& log) {
  const json body = parse_config(request);
  check_keys(body, {"manufactured", "R", "n_cells", "half_width", "solver", "estimator", "seed"}, "estimate");
  const ProblemSelection sel = parse_problem(body);
  const SolverConfig solver = parse_solver(body, resolve_seed(body, request));
  const ProblemSpec spec = make_problem(manufactured(sel.manufactured), sel.R, sel.n_cells, sel.half_width);

  json est = json::object();
  if (const auto it = body.find("estimator"); it != body.end() && !it->is_null()) {
    est = *it;
    check_keys(est, {"beta", "m", "M", "c0", "gap_floor"}, "estimator");
  }
  AuxiliaryConfig aux = AuxiliaryConfig::standard(sel.R, value_or<double>(est, "m", spec.m), value_or<double>(est, "M", spec.M));
  aux.beta = value_or<double>(est, "beta", aux.beta);
  aux.c0 = value_or<double>(est, "c0", aux.c0);
  aux.gap_floor = value_or<double>(est, "gap_floor", aux.gap_floor);
  aux.validate();

  json doc;
  doc["config"] = sel.to_json();
  doc["config"]["solver"] = solver_json(solver);
  doc["config"]["estimator"] = aux_json(aux);
  doc["config"]["seed"] = solver.seed;
  doc["grid"] = grid_json(spec.grid);

  const Output out{request.out_dir};
  const SolutionState state = newton_solve(spec, solver);
  doc["solution"] = solution_json(state, spec);
  out.write("solution.csv", field_csv(state.u));
  out.write("solver_log.jsonl", solver_log(state));

  ExitCode code = ExitCode::success;
  if (!state.converged) {
    doc["status"] = "solve-failed";
    doc["error"] = state.detail;
    code = ExitCode::check_failed;
  } else {
    try {
      const EstimateReport report = bound_report(spec, state.u, aux);
      doc["report"] = report_json(report);
      const HessianField hessians(state.u);
      const PhiField phi = phi_eval(hessians, TauField(hessians, aux), aux);
      out.write("phi.csv", masked_field_csv(phi.grid, phi.values, phi.present));
      if (report.x0.rim_adjacent) {
        doc["status"] = "rim-adjacent";
        code = ExitCode::rim_adjacent;
      } else if (!report.chain_holds()) {
        doc["status"] = "chain-violated";
        code = ExitCode::check_failed;
      } else {
        doc["status"] = "ok";
      }
    } catch (const RangeError& e) {
      doc["status"] = "range-error";
      doc["error"] = e.what();
      code = ExitCode::range_error;
    } catch (const EmptySetError& e) {
      doc["status"] = "empty-sigma";
      doc["error"] = e.what();
      code = ExitCode::empty_sigma;
    }
  }
  out.write_json("report.json", doc);
  log << "estimate: " << doc["status"].get<std::string>();
  if (doc.contains("error")) log << ": " << doc["error"].get<std::string>();
  log << "\n";
  return static_cast<int>(code);
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const CommandRequest& request, std::ostream& log) {
  const json body = parse_config(request);
  check_keys(body, {"families", "radii", "n_cells", "scales", "solver", "estimator", "seed"}, "sweep");
  const auto families = list_or<std::string>(body, "families", {"cosh"});
  const auto radii = list_or<double>(body, "radii", {0.5, 1.0, 2.0});
  const auto levels = list_or<int>(body, "n_cells", {64});
  const auto scales = list_or<double>(body, "scales", {1.0});
  if (families.empty() || radii.empty() || levels.empty() || scales.empty())
    throw InputError("sweep needs at least one family, radius, grid and scale");
  for (const auto& name : families) manufactured(name);
  const SolverConfig solver = parse_solver(body, resolve_seed(body, request));
  json est = json::object();
  if (const auto it = body.find("estimator"); it != body.end() && !it->is_null()) {
    est = *it;
    check_keys(est, {"beta", "gap_floor"}, "estimator");
  }
  AuxiliaryConfig aux;
  aux.beta = value_or<double>(est, "beta", aux.beta);
  aux.gap_floor = value_or<double>(est, "gap_floor", aux.gap_floor);

  std::vector<SweepInstance> instances;
  for (const auto& family : families)
    for (double scale : scales)
      for (double radius : radii)
        for (int n : levels) instances.push_back({family, radius, n, scale});
  const std::vector<SweepRow> rows = parameter_sweep(instances, solver, aux);

  std::string csv =
      "family,scale,R_input,R,n_cells,ok,failure,iterations,m,M,r_squared,c0,sup_grad_f,sup_hess_f,sup_grad_u,"
      "phi_max,eta_lambda1_max,u_tau_tau_origin,bound_at_origin\n";
  bool all_ok = true;
  for (const SweepRow& r : rows) {
    all_ok = all_ok && r.ok;
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    const std::vector<std::string> cells{
        r.instance.family, format_double(r.instance.scale), format_double(r.instance.radius), format_double(r.radius),
        std::to_string(r.instance.n_cells), r.ok ? "1" : "0", failure, std::to_string(r.iterations),
        format_double(r.constants.m), format_double(r.constants.M), format_double(r.r_squared), format_double(r.c0),
        format_double(r.constants.sup_grad_f), format_double(r.constants.sup_hess_f),
        format_double(r.constants.sup_grad_u), format_double(r.phi_max), format_double(r.eta_lambda1_max),
        format_double(r.u_tau_tau_origin), format_double(r.bound_at_origin)};
    for (std::size_t k = 0; k < cells.size(); ++k) csv += (k ? "," : "") + cells[k];
    csv += "\n";
  }
  const Output out{request.out_dir};
  out.write("sweep.csv", csv);
  json doc;
  doc["config"] = {{"families", families}, {"radii", radii},           {"n_cells", levels},
                   {"scales", scales},     {"solver", solver_json(solver)}, {"seed", solver.seed},
                   {"estimator", {{"beta", aux.beta}, {"gap_floor", aux.gap_floor}, {"r_squared", "R^2/2"}, {"c0", "32/m"}}}};
  doc["instances"] = rows.size();
  doc["failed"] = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok; });
  out.write_json("sweep.json", doc);
  log << "sweep: " << rows.size() << " instances, " << doc["failed"].get<long>() << " failed\n";
  return static_cast<int>(all_ok ? ExitCode::success : ExitCode::check_failed);
}

// ---------------------------------------------------------------- convergence

int cmd_convergence(const CommandRequest& request, std::ostream& log) {
  const json body = parse_config(request);
  check_keys(body, {"manufactured", "R", "levels", "solver", "seed"}, "convergence");
  const std::string name = value_or<std::string>(body, "manufactured", "cosh");
  manufactured(name);
  const double radius = value_or<double>(body, "R", 1.0);
  const std::vector<int> levels = list_or<int>(body, "levels", {32, 64, 128});
  const SolverConfig solver = parse_solver(body, resolve_seed(body, request));
  const ConvergenceStudy study = convergence_study(name, levels, radius, solver);

  std::string csv = "n_cells,h,sup_error,order,iterations,residual,converged,status\n";
  for (const ConvergenceRow& r : study.rows) {
    csv += std::to_string(r.n_cells) + "," + format_double(r.h) + "," + format_double(r.sup_error) + "," +
           (r.order ? format_double(*r.order) : "") + "," + std::to_string(r.iterations) + "," +
           format_double(r.residual) + "," + (r.converged ? "1" : "0") + "," + r.status + "\n";
  }
  const Output out{request.out_dir};
  out.write("convergence.csv", csv);
  json doc;
  doc["config"] = {{"manufactured", name}, {"R", radius}, {"levels", levels}, {"solver", solver_json(solver)},
                   {"seed", solver.seed}};
  doc["complete"] = study.complete;
  out.write_json("convergence.json", doc);
  log << "convergence: " << study.rows.size() << " of " << levels.size() << " levels"
      << (study.complete ? "" : " (aborted at a non-converged level)") << "\n";
  return static_cast<int>(study.complete ? ExitCode::success : ExitCode::check_failed);
}

}  // namespace

std::vector<std::string> command_names() { return {"eigen-check", "solve", "estimate", "sweep", "convergence"}; }

int run_command(const CommandRequest& request, std::ostream& log) {
  try {
    std::error_code ec;
    fs::create_directories(request.out_dir, ec);
    if (ec || !fs::is_directory(request.out_dir))
      throw InputError("output directory " + request.out_dir.string() + " is not usable");
    if (request.command == "eigen-check") return cmd_eigen_check(request, log);
    if (request.command == "solve") return cmd_solve(request, log);
    if (request.command == "estimate") return cmd_estimate(request, log);
    if (request.command == "sweep") return cmd_sweep(request, log);
    if (request.command == "convergence") return cmd_convergence(request, log);
    throw InputError("unknown command '" + request.command + "'");
  } catch (const InputError& e) {
    log << request.command << ": configuration error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const RangeError& e) {
    log << request.command << ": range error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::range_error);
  } catch (const EmptySetError& e) {
    log << request.command << ": " << e.what() << "\n";
    return static_cast<int>(ExitCode::empty_sigma);
  } catch (const Error& e) {
    // Write failures surface here as generic errors; an unwritable output is
    // a configuration problem.
    log << request.command << ": " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  }
}

// ---------------------------------------------------------------- eigen-check suite

SymMatrix random_symmetric(int n, double gap_min, std::mt19937_64& rng) {
  if (n < 2) throw InputError("matrix dimension must be at least 2");
  if (!(gap_min >= 0.0)) throw InputError("gap_min must be non-negative");
  const double slack = 4.0 - (n - 1) * gap_min;
  if (slack < 0.0) throw InputError("gap_min too large to fit the eigenvalues in [-2, 2]");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // weights[0] is the offset from -2, weights[k] the extra k-th spacing; one
  // spacing gets no extra so the smallest spacing is exactly gap_min.
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (double& w : weights) w = unit(rng);
  const auto tight = 1 + static_cast<std::size_t>(unit(rng) * (n - 1)) % static_cast<std::size_t>(n - 1);
  weights[tight] = 0.0;
  double total = 0.0;
  for (double w : weights) total += w;
  const double factor = total > 0.0 ? slack * unit(rng) / total : 0.0;
  Eigen::VectorXd lambda(n);
  lambda(0) = -2.0 + weights[0] * factor;
  for (int k = 1; k < n; ++k) lambda(k) = lambda(k - 1) + gap_min + weights[static_cast<std::size_t>(k)] * factor;

  Eigen::MatrixXd g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) g(r, c) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int k = 0; k < n; ++k)
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  const Eigen::MatrixXd w = q * lambda.asDiagonal() * q.transpose();
  return SymMatrix(0.5 * (w + w.transpose()));
}

EigenCheckSummary eigen_check(const EigenCheckConfig& config) {
  if (config.dimensions.empty()) throw InputError("eigen-check needs at least one dimension");
  if (config.matrices < 1) throw InputError("matrices_per_dimension must be positive");
  if (!(config.h >= 1e-7 && config.h <= 1e-3)) throw InputError("h must lie in [1e-7, 1e-3]");
  std::mt19937_64 rng(config.seed);
  EigenCheckSummary summary;
  double worst_ratio = -1.0;
  for (int n : config.dimensions) {
    EigenCheckDimension dim;
    dim.n = n;
    for (int sample = 0; sample < config.matrices; ++sample) {
      const SymMatrix w = random_symmetric(n, config.gap_min, rng);
      for (int k = 0; k < n; ++k) {
        EigenCheckCase c;
        c.n = n;
        c.sample = sample;
        c.k = k;
        c.w = w.matrix();
        ++dim.cases;
        try {
          const EigenDerivatives formula = symmetric_pair_view(eigen_derivatives(w, k));
          const EigenDerivatives oracle = perturbation_oracle(w, k, config.h);
          const DerivativeDiscrepancy d = compare(formula, oracle);
          c.first = d.first;
          c.second = d.second;
        } catch (const DegenerateGapError& e) {
          c.degenerate = true;
          c.error = e.what();
        }
        if (c.degenerate) {
          ++dim.degenerate;
          if (!summary.worst || !summary.worst->degenerate) summary.worst = c;
          continue;
        }
        dim.max_first = std::max(dim.max_first, c.first);
        dim.max_second = std::max(dim.max_second, c.second);
        const double ratio = std::max(c.first / config.first_tolerance, c.second / config.second_tolerance);
        if ((!summary.worst || !summary.worst->degenerate) && ratio > worst_ratio) {
          worst_ratio = ratio;
          summary.worst = c;
        }
      }
    }
    summary.cases += dim.cases;
    summary.degenerate_cases += dim.degenerate;
    summary.max_first = std::max(summary.max_first, dim.max_first);
    summary.max_second = std::max(summary.max_second, dim.max_second);
    summary.dimensions.push_back(dim);
  }
  summary.passed = summary.degenerate_cases == 0 && summary.max_first <= config.first_tolerance &&
                   summary.max_second <= config.second_tolerance;
  return summary;
}

}  // namespace gclab
