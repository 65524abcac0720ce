// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned
// here; the process exits non-zero if any criterion fails.

#include "gclab/commands.hpp"
#include "gclab/eigensys.hpp"
#include "gclab/error.hpp"
#include "gclab/estimator.hpp"
#include "gclab/fieldcalc.hpp"
#include "gclab/io.hpp"
#include "gclab/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gclab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Solved {
  ProblemSpec spec;
  SolutionState state;
  double sup_error = 0.0;
};

Solved solve(const std::string& name, double radius, int n) {
  ProblemSpec spec = make_problem(manufactured(name), radius, n);
  SolverConfig config;
  SolutionState state = newton_solve(spec, config);
  double err = 0.0;
  for (std::size_t k = 0; k < state.u.values().size(); ++k)
    err = std::max(err, std::abs(state.u.values()[k] - spec.boundary.values()[k]));
  return {std::move(spec), std::move(state), err};
}

// Shared state: the solves are reused by several criteria.
struct Context {
  std::vector<int> levels{32, 64, 128};
  std::map<int, Solved> cosh;
  std::map<int, Solved> aniso;
  std::vector<const Solved*> all() const {
    std::vector<const Solved*> out;
    for (const auto& [n, s] : cosh) out.push_back(&s);
    for (const auto& [n, s] : aniso) out.push_back(&s);
    return out;
  }
};

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  EigenCheckConfig config;
  const EigenCheckSummary s = eigen_check(config);
  const double elapsed = seconds_since(t0);
  const bool pass = s.passed && s.degenerate_cases == 0 && s.max_first <= 1e-6 && s.max_second <= 1e-4 &&
                    s.cases == 1400 && elapsed < 60.0;
  return {pass, std::to_string(s.cases) + " cases, max first " + fmt(s.max_first) + " (tol 1e-6), max second " +
                    fmt(s.max_second) + " (tol 1e-4), " + fmt(elapsed) + " s (limit 60)"};
}

Outcome closed_form() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  double value_err = 0.0, vector_err = 0.0;
  int count = 0;
  while (count < 10000) {
    const double a = entry(rng), b = entry(rng), d = entry(rng);
    const SymMatrix w = SymMatrix::from_rows({{a, b}, {b, d}});
    const EigenSystem ref = eigen_system(w);
    if (!(ref.gap > 1e-6)) continue;
    const EigenSystem cf = closed_form_2x2(w);
    value_err = std::max(value_err, (cf.values - ref.values).cwiseAbs().maxCoeff());
    vector_err = std::max(vector_err, (cf.vectors - ref.vectors).cwiseAbs().maxCoeff());
    ++count;
  }
  return {value_err <= 1e-12 && vector_err <= 1e-10, std::to_string(count) + " matrices, eigenvalues " +
                                                         fmt(value_err) + " (tol 1e-12), eigenvectors " +
                                                         fmt(vector_err) + " (tol 1e-10)"};
}

Outcome tabulated_values() {
  const EigenDerivatives d = eigen_derivatives(SymMatrix::diagonal({3, 1}), 0);
  const EigenDerivatives t = eigen_derivatives(SymMatrix::diagonal({4, 1, 2}), 0);
  // 0-based indices: W(1,0) is the entry in row 2, column 1.
  const std::vector<std::pair<double, double>> hits{
      {d.d_lambda(0, 0), 1.0},           {d.d_tau(1, 1, 0), 0.5},          {d.d2_lambda(0, 1, 1, 0), 0.5},
      {d.d2_tau(0, 1, 0, 1, 0), -0.25},  {t.d2_tau(1, 1, 2, 2, 0), 1.0 / 6.0}};
  double worst = 0.0;
  for (const auto& [got, want] : hits) worst = std::max(worst, std::abs(got - want));
  return {worst <= 1e-14, "5 values, max deviation " + fmt(worst) + " (tol 1e-14)"};
}

Outcome solver_convergence(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::ostringstream out;
  for (int n : ctx.levels) {
    ctx.cosh.emplace(n, solve("cosh", 1.0, n));
    const Solved& s = ctx.cosh.at(n);
    pass = pass && s.state.converged && s.state.iterations <= 12 && s.state.residual_norm < 1e-10;
    out << "n=" << n << ": " << s.state.iterations << " it, res " << fmt(s.state.residual_norm) << ", err "
        << fmt(s.sup_error) << "; ";
  }
  for (std::size_t k = 1; k < ctx.levels.size(); ++k) {
    const double p = order(ctx.cosh.at(ctx.levels[k - 1]).sup_error, ctx.cosh.at(ctx.levels[k]).sup_error);
    pass = pass && within(p, 1.7, 2.3);
    out << "order " << fmt(p) << "; ";
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 120.0;
  out << fmt(elapsed) << " s (limits: 12 it, 1e-10, order [1.7, 2.3], 120 s)";
  return {pass, out.str()};
}

Outcome equation_identity(Context& ctx) {
  for (int n : ctx.levels) ctx.aniso.emplace(n, solve("aniso-quadratic", 1.0, n));
  double worst = 0.0;
  int states = 0;
  for (const Solved* s : ctx.all()) {
    if (!s->state.converged) continue;
    ++states;
    worst = std::max(worst, equation_identity_check(HessianField(s->state.u), s->spec).sup);
  }
  return {worst <= 1e-9 && states == 6, std::to_string(states) + " converged states, max " + fmt(worst) + " (tol 1e-9)"};
}

Outcome differentiated_identity(const Context& ctx) {
  std::vector<double> cosh;
  for (int n : ctx.levels) {
    const Solved& s = ctx.cosh.at(n);
    cosh.push_back(differentiated_equation_check(HessianField(s.state.u), *s.spec.exact).sup);
  }
  // Quadratic exactness is a property of the stencils, so it is measured on
  // the exact nodal field; the solver-output values sit at the h^-3 roundoff
  // level and are reported alongside.
  double exact = 0.0;
  std::ostringstream solved;
  for (int n : ctx.levels) {
    const Solved& s = ctx.aniso.at(n);
    exact = std::max(exact, differentiated_equation_check(HessianField(s.spec.boundary), *s.spec.exact).sup);
    solved << fmt(differentiated_equation_check(HessianField(s.state.u), *s.spec.exact).sup) << " ";
  }
  const double p1 = order(cosh[0], cosh[1]);
  const double p2 = order(cosh[1], cosh[2]);
  const bool pass = within(p1, 1.5, 2.5) && within(p2, 1.5, 2.5) && exact < 1e-10;
  return {pass, "cosh " + fmt(cosh[0]) + " " + fmt(cosh[1]) + " " + fmt(cosh[2]) + ", orders " + fmt(p1) + " " +
                    fmt(p2) + " (range [1.5, 2.5]); aniso exact field " + fmt(exact) +
                    " (tol 1e-10), solver output " + solved.str()};
}

Outcome second_variation_identity(const Context& ctx) {
  std::vector<double> cosh, floors;
  for (int n : ctx.levels) {
    const Solved& s = ctx.cosh.at(n);
    const IdentityCheck c = det_second_variation_check(s.state.u, HessianField(s.state.u), *s.spec.exact);
    cosh.push_back(c.sup);
    floors.push_back(c.floor);
  }
  double exact = 0.0;
  std::ostringstream solved;
  for (int n : ctx.levels) {
    const Solved& s = ctx.aniso.at(n);
    exact = std::max(exact, det_second_variation_check(s.spec.boundary, HessianField(s.spec.boundary), *s.spec.exact).sup);
    solved << fmt(det_second_variation_check(s.state.u, HessianField(s.state.u), *s.spec.exact).sup) << " ";
  }
  bool above_floor = true;
  for (std::size_t k = 0; k < cosh.size(); ++k) above_floor = above_floor && cosh[k] > 10.0 * floors[k];
  const double p1 = order(cosh[0], cosh[1]);
  const double p2 = order(cosh[1], cosh[2]);
  const bool pass = above_floor && within(p1, 1.5, 2.5) && within(p2, 1.5, 2.5) && exact < 1e-8;
  return {pass, "cosh " + fmt(cosh[0]) + " " + fmt(cosh[1]) + " " + fmt(cosh[2]) + " (floors " + fmt(floors[0]) +
                    " " + fmt(floors[1]) + " " + fmt(floors[2]) + "), orders " + fmt(p1) + " " + fmt(p2) +
                    " (range [1.5, 2.5]); aniso exact field " + fmt(exact) + " (tol 1e-8), solver output " +
                    solved.str()};
}

Outcome estimate_invariants(const Context& ctx) {
  bool sandwich = true, sign = true;
  int nodes = 0;
  for (int n : ctx.levels) {
    const Solved& s = ctx.cosh.at(n);
    const AuxiliaryConfig c = AuxiliaryConfig::standard(s.spec.radius, s.spec.m, s.spec.M);
    const TauField tau = tau_field(s.state.u, c);
    const Grid2D& g = s.spec.grid;
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const Eigen::Vector2d x = g.point(i, j);
        const bool member = sigma_membership(tau, i, j, c);
        ++nodes;
        if (x.squaredNorm() < c.r_squared && !member) sandwich = false;
        if (member && !(x.squaredNorm() < c.R * c.R)) sandwich = false;
        if (x.squaredNorm() < c.R * c.R && ((eta_eval(tau, i, j, c) > 0.0) != member)) sign = false;
      }
  }

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const AuxiliaryConfig c = AuxiliaryConfig::standard(1.0, 0.25, 1.0);
  double rotation = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix2d q = Eigen::Rotation2Dd(angle(rng)).toRotationMatrix();
    const Eigen::Vector2d x(coord(rng), coord(rng));
    const Eigen::Vector2d tau(std::cos(angle(rng)), std::sin(angle(rng)));
    rotation = std::max(rotation, std::abs(eta_eval(q * x, q * tau, c) - eta_eval(x, tau, c)));
  }

  const ExponentialWeight g(c);
  double weight = 0.0;
  for (double t : {0.0, 0.1, 0.5, 1.0}) {
    const double lhs = g.second(t) * g.value(t);
    weight = std::max(weight, std::abs(lhs - g.derivative(t) * g.derivative(t)) / lhs);
  }
  const bool pass = sandwich && sign && rotation <= 1e-12 && weight <= 1e-15;
  return {pass, std::to_string(nodes) + " nodes, sandwich " + (sandwich ? "ok" : "violated") + ", sign " +
                    (sign ? "ok" : "mismatch") + ", rotation " + fmt(rotation) + " (tol 1e-12), g''g - g'^2 " +
                    fmt(weight) + " (tol 1e-15 relative)"};
}

Outcome bound_chain(const Context& ctx) {
  bool pass = true;
  std::ostringstream out;
  for (const std::string family : {"cosh", "aniso-quadratic"}) {
    const auto& solved = family == "cosh" ? ctx.cosh : ctx.aniso;
    out << family << ": ";
    try {
      std::map<int, EstimateReport> reports;
      for (int n : {64, 128}) {
        const Solved& s = solved.at(n);
        if (!s.state.converged) throw Error("solver did not converge at n = " + std::to_string(n));
        const AuxiliaryConfig c = AuxiliaryConfig::standard(s.spec.radius, s.spec.m, s.spec.M);
        reports.emplace(n, bound_report(s.spec, s.state.u, c));
        pass = pass && reports.at(n).chain_holds();
      }
      const double dphi = std::abs(reports.at(128).phi_max / reports.at(64).phi_max - 1.0);
      const double deta = std::abs(reports.at(128).eta_lambda1_max / reports.at(64).eta_lambda1_max - 1.0);
      pass = pass && dphi < 0.05 && deta < 0.05;
      out << "chain " << (reports.at(64).chain_holds() && reports.at(128).chain_holds() ? "holds" : "violated")
          << ", u_tt(0) " << fmt(reports.at(128).u_tau_tau_origin) << " <= bound " << fmt(reports.at(128).bound_at_origin)
          << ", phi_max change " << fmt(dphi) << ", eta*lambda1 change " << fmt(deta) << " (tol 0.05); ";
    } catch (const Error& e) {
      pass = false;
      out << "error: " << e.what() << "; ";
    }
  }
  return {pass, out.str()};
}

Outcome critical_point(const Context& ctx) {
  // The argmax is evaluated even when it sits next to the rim of the
  // localization set, so that every level contributes a residual.
  std::vector<double> residuals;
  std::ostringstream out;
  for (int n : ctx.levels) {
    const Solved& s = ctx.cosh.at(n);
    const AuxiliaryConfig c = AuxiliaryConfig::standard(s.spec.radius, s.spec.m, s.spec.M);
    const HessianField hessians(s.state.u);
    const TauField tau(hessians, c);
    InteriorMax x0 = locate_interior_max(phi_eval(hessians, tau, c));
    const bool rim = x0.rim_adjacent;
    x0.rim_adjacent = false;
    const CriticalPointResult r = critical_point_check(hessians, tau, c, x0);
    if (r.skipped) return {false, "n=" + std::to_string(n) + ": " + r.reason};
    residuals.push_back(r.max());
    out << "n=" << n << " x0=(" << fmt(x0.x(0)) << ", " << fmt(x0.x(1)) << ")" << (rim ? " rim" : "") << " residual "
        << fmt(r.max()) << "; ";
  }
  double worst = 1e300;
  for (std::size_t k = 1; k < residuals.size(); ++k) {
    const double p = order(residuals[k - 1], residuals[k]);
    worst = std::min(worst, p);
    out << "order " << fmt(p) << "; ";
  }
  out << "(required >= 0.9)";
  return {worst >= 0.9, out.str()};
}

Outcome gradient_bound(const Context& ctx) {
  int checked = 0;
  bool pass = true;
  double worst_margin = 1e300;
  for (const Solved* s : ctx.all()) {
    if (!s->state.converged) continue;
    const GradientBoundReport r = gradient_bound_check(s->state.u, s->spec.radius);
    if (!r.convex) continue;
    ++checked;
    pass = pass && r.holds;
    worst_margin = std::min(worst_margin, r.bound + r.slack - r.sup_gradient);
  }
  pass = pass && checked == 6;
  return {pass, std::to_string(checked) + " convex instances, smallest margin " + fmt(worst_margin)};
}

Outcome determinism() {
  const std::string config =
      R"({"estimate": {"manufactured": "cosh", "R": 1.0, "n_cells": 64, "seed": 11}})";
  const fs::path base = fs::temp_directory_path() / "gclab_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream log;
  std::vector<int> codes;
  for (const char* run : {"a", "b"}) {
    fs::create_directories(base / run);
    codes.push_back(run_command({"estimate", config, base / run, 11}, log));
  }
  bool same = true;
  int files = 0;
  for (const char* file : {"report.json", "phi.csv", "solution.csv", "solver_log.jsonl"}) {
    if (!fs::exists(base / "a" / file)) {
      same = false;
      continue;
    }
    ++files;
    same = same && read_text(base / "a" / file) == read_text(base / "b" / file);
  }
  fs::remove_all(base);
  return {same && codes[0] == codes[1] && files == 4,
          std::to_string(files) + " artifacts compared, exit codes " + std::to_string(codes[0]) + "/" +
              std::to_string(codes[1]) + (same ? ", byte-identical" : ", differ")};
}

}  // namespace

int main() {
  Context ctx;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"eigen-derivative oracle equivalence", oracle_equivalence},
      {"2x2 closed form agrees with eigen_system", closed_form},
      {"tabulated derivative values", tabulated_values},
      {"solver convergence on cosh", [&] { return solver_convergence(ctx); }},
      {"equation identity on converged states", [&] { return equation_identity(ctx); }},
      {"differentiated-equation identity", [&] { return differentiated_identity(ctx); }},
      {"second-variation identity", [&] { return second_variation_identity(ctx); }},
      {"estimate machinery invariants", [&] { return estimate_invariants(ctx); }},
      {"bound chain at the origin", [&] { return bound_chain(ctx); }},
      {"critical-point identity at the argmax", [&] { return critical_point(ctx); }},
      {"gradient bound for convex solutions", [&] { return gradient_bound(ctx); }},
      {"estimate command determinism", determinism},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%2zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
