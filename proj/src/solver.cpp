#include "gclab/solver.hpp"

#include "gclab/error.hpp"
#include "gclab/fieldcalc.hpp"
#include "gclab/parallel.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace gclab {

namespace {

double smaller_eigenvalue(const Eigen::Matrix2d& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  return mean - std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
}

Eigen::VectorXd to_vector(const ScalarField& field) {
  return Eigen::Map<const Eigen::VectorXd>(field.values().data(), static_cast<Eigen::Index>(field.values().size()));
}

void copy_boundary(ScalarField& u, const ProblemSpec& spec) {
  const int n = spec.grid.n_cells();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      if (!spec.is_interior(i, j)) u(i, j) = spec.boundary(i, j);
}

// Uniform in [-1, 1) from the top 53 bits, so the stream is identical on every
// standard library (std::uniform_real_distribution is not).
double symmetric_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

ScalarField perturbed_exact(const ProblemSpec& spec, const SolverConfig& config) {
  if (!spec.exact) throw InputError("exact-perturbed start needs a manufactured solution");
  const Grid2D& grid = spec.grid;
  ScalarField u = ScalarField::sample(grid, spec.exact->u);
  // Sine modes vanishing on the inner boundary ring x = +-(a - h), scaled with
  // the domain so their second derivatives do not grow on small balls.
  const double inner = grid.half_width() - grid.spacing();
  std::mt19937_64 rng(config.seed);
  double c[3][3];
  for (auto& row : c)
    for (double& v : row) v = symmetric_unit(rng) / 9.0;
  const int n = grid.n_cells();
  for (int j = 2; j <= n - 2; ++j)
    for (int i = 2; i <= n - 2; ++i) {
      const Eigen::Vector2d x = grid.point(i, j);
      const double s1 = std::numbers::pi * (x(0) + inner) / (2.0 * inner);
      const double s2 = std::numbers::pi * (x(1) + inner) / (2.0 * inner);
      double bump = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) bump += c[k][l] * std::sin((k + 1) * s1) * std::sin((l + 1) * s2);
      u(i, j) += config.perturbation_amplitude * inner * inner * bump;
    }
  return u;
}

// Least-squares fit of x^T A x / 2 + b.x + c to the boundary rings, evaluated
// everywhere.
ScalarField quadratic_fit(const ProblemSpec& spec) {
  const Grid2D& grid = spec.grid;
  const int n = grid.n_cells();
  std::vector<Eigen::Vector2d> points;
  std::vector<double> values;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      if (!spec.is_interior(i, j)) {
        points.push_back(grid.point(i, j));
        values.push_back(spec.boundary(i, j));
      }
  auto basis = [](const Eigen::Vector2d& x) {
    Eigen::Matrix<double, 6, 1> b;
    b << 0.5 * x(0) * x(0), x(0) * x(1), 0.5 * x(1) * x(1), x(0), x(1), 1.0;
    return b;
  };
  Eigen::MatrixXd a(static_cast<Eigen::Index>(points.size()), 6);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = basis(points[k]).transpose();
    rhs(static_cast<Eigen::Index>(k)) = values[k];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(rhs);
  return ScalarField::sample(grid, [&](const Eigen::Vector2d& x) { return basis(x).dot(coef); });
}

}  // namespace

ProblemSpec make_problem(const ManufacturedSolution& solution, double radius, int n_cells, double half_width) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("problem radius must be positive");
  const double a = half_width > 0.0 ? half_width : radius;
  if (a < radius) throw InputError("grid half width must cover the ball of the given radius");
  ProblemSpec spec;
  spec.radius = radius;
  spec.grid = Grid2D(a, n_cells);
  spec.f = ScalarField::sample(spec.grid, solution.f);
  spec.boundary = ScalarField::sample(spec.grid, solution.u);
  spec.exact = solution;
  if (!spec.f.all_finite() || !spec.boundary.all_finite()) throw InputError("manufactured data is not finite on the grid");

  spec.m = std::numeric_limits<double>::infinity();
  spec.M = 0.0;
  const int n = spec.grid.n_cells();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const double value = spec.f(i, j);
      if (!(value > 0.0)) throw InputError("prescribed curvature must be positive on the grid");
      if (spec.grid.point(i, j).norm() <= radius) {
        spec.m = std::min(spec.m, value);
        spec.M = std::max(spec.M, value);
      }
    }
  return spec;
}

InitialGuess parse_initial_guess(const std::string& name) {
  if (name == "exact-perturbed") return InitialGuess::exact_perturbed;
  if (name == "quadratic-fit") return InitialGuess::quadratic_fit;
  throw InputError("unknown initial guess '" + name + "'");
}

std::string to_string(InitialGuess guess) {
  return guess == InitialGuess::exact_perturbed ? "exact-perturbed" : "quadratic-fit";
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
  if (!(residual_tolerance > 0.0)) throw InputError("residual_tolerance must be positive");
  if (max_halvings < 0) throw InputError("max_halvings must be non-negative");
  if (!std::isfinite(perturbation_amplitude)) throw InputError("perturbation amplitude must be finite");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::singular_jacobian: return "singular-jacobian";
    case SolveStatus::line_search_failed: return "line-search-failed";
    case SolveStatus::non_finite: return "non-finite";
  }
  return "unknown";
}

ScalarField residual(const ScalarField& u, const ProblemSpec& spec) {
  if (!(u.grid() == spec.grid)) throw InputError("residual: field and problem grids differ");
  const int n = spec.grid.n_cells();
  ScalarField out(spec.grid);
  parallel_for(0, n + 1, [&](int j) {
    for (int i = 0; i <= n; ++i) {
      if (!spec.is_interior(i, j)) {
        out(i, j) = u(i, j) - spec.boundary(i, j);
        continue;
      }
      const Eigen::Vector2d g = gradient_fd(u, i, j);
      const Eigen::Matrix2d h = hessian_fd(u, i, j);
      const double q = 1.0 + g.squaredNorm();
      out(i, j) = h.determinant() - spec.f(i, j) * q * q;
    }
  });
  return out;
}

double sup_norm(const ScalarField& field) {
  double s = 0.0;
  for (double v : field.values()) s = std::max(s, std::abs(v));
  return s;
}

double convexity_margin(const ScalarField& u) {
  const HessianField hessians(u);
  const int n = u.grid().n_cells();
  double lowest = std::numeric_limits<double>::infinity();
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) lowest = std::min(lowest, smaller_eigenvalue(hessians.at(i, j).hessian));
  return lowest;
}

Eigen::SparseMatrix<double> jacobian_assemble(const ScalarField& u, const ProblemSpec& spec) {
  if (!(u.grid() == spec.grid)) throw InputError("jacobian: field and problem grids differ");
  const Grid2D& grid = spec.grid;
  const int n = grid.n_cells();
  const double h = grid.spacing();
  const double h2 = h * h;
  const auto size = static_cast<Eigen::Index>(grid.node_count());

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(grid.node_count() * 9);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const auto row = static_cast<Eigen::Index>(grid.index(i, j));
      if (!spec.is_interior(i, j)) {
        entries.emplace_back(row, row, 1.0);
        continue;
      }
      auto add = [&](int di, int dj, double v) {
        if (v != 0.0) entries.emplace_back(row, static_cast<Eigen::Index>(grid.index(i + di, j + dj)), v);
      };
      const Eigen::Vector2d g = gradient_fd(u, i, j);
      const Eigen::Matrix2d cof = cofactor(hessian_fd(u, i, j));
      const double q = 1.0 + g.squaredNorm();
      // d[f q^2] = 2 f q * 2 (u1 du1 + u2 du2)
      const double w = 4.0 * spec.f(i, j) * q;
      const double c11 = cof(0, 0) / h2;
      const double c22 = cof(1, 1) / h2;
      const double c12 = 2.0 * cof(0, 1) / (4.0 * h2);
      const double d1 = w * g(0) / (2.0 * h);
      const double d2 = w * g(1) / (2.0 * h);
      add(0, 0, -2.0 * c11 - 2.0 * c22);
      add(1, 0, c11 - d1);
      add(-1, 0, c11 + d1);
      add(0, 1, c22 - d2);
      add(0, -1, c22 + d2);
      add(1, 1, c12);
      add(-1, -1, c12);
      add(1, -1, -c12);
      add(-1, 1, -c12);
    }
  Eigen::SparseMatrix<double> jac(size, size);
  jac.setFromTriplets(entries.begin(), entries.end());
  jac.makeCompressed();
  return jac;
}

ScalarField initial_guess(const ProblemSpec& spec, const SolverConfig& config) {
  ScalarField u = config.initial_guess == InitialGuess::exact_perturbed ? perturbed_exact(spec, config)
                                                                         : quadratic_fit(spec);
  copy_boundary(u, spec);
  return u;
}

SolutionState newton_solve(const ProblemSpec& spec, const SolverConfig& config) {
  return newton_solve(spec, config, initial_guess(spec, config));
}

SolutionState newton_solve(const ProblemSpec& spec, const SolverConfig& config, ScalarField start) {
  config.validate();
  if (!(start.grid() == spec.grid)) throw InputError("initial guess grid differs from the problem grid");
  copy_boundary(start, spec);

  SolutionState state{std::move(start)};
  ScalarField res = residual(state.u, spec);
  state.residual_norm = sup_norm(res);
  state.convexity_margin = convexity_margin(state.u);
  state.log.push_back({0, state.residual_norm, 0, 0.0, state.convexity_margin});

  const Grid2D& grid = spec.grid;
  while (true) {
    if (!std::isfinite(state.residual_norm)) {
      state.status = SolveStatus::non_finite;
      state.detail = "residual is not finite";
      return state;
    }
    if (state.residual_norm <= config.residual_tolerance) {
      state.converged = state.convexity_margin > -1e-10;
      state.status = state.converged ? SolveStatus::converged : SolveStatus::line_search_failed;
      if (!state.converged) state.detail = "converged residual but discrete convexity lost";
      return state;
    }
    if (state.iterations >= config.max_iterations) {
      state.status = SolveStatus::max_iterations;
      std::ostringstream msg;
      msg << "no convergence after " << state.iterations << " iterations (residual " << state.residual_norm << ")";
      state.detail = msg.str();
      return state;
    }

    const Eigen::SparseMatrix<double> jac = jacobian_assemble(state.u, spec);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    const Eigen::VectorXd rhs = -to_vector(res);
    Eigen::VectorXd delta;
    if (lu.info() == Eigen::Success) {
      delta = lu.solve(rhs);
      // One step of iterative refinement keeps the relative residual near 1e-12.
      const Eigen::VectorXd defect = rhs - jac * delta;
      if (defect.norm() > 1e-12 * rhs.norm()) delta += lu.solve(defect);
    }
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      Eigen::Index worst = 0;
      double smallest = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < jac.rows(); ++k)
        if (std::abs(jac.coeff(k, k)) < smallest) {
          smallest = std::abs(jac.coeff(k, k));
          worst = k;
        }
      const int row = static_cast<int>(worst / grid.nodes_per_axis());
      const int col = static_cast<int>(worst % grid.nodes_per_axis());
      std::ostringstream msg;
      msg << "singular Jacobian; smallest pivot near node (" << col << ", " << row << ")";
      state.status = SolveStatus::singular_jacobian;
      state.detail = msg.str();
      return state;
    }

    double step = 1.0;
    int halvings = 0;
    bool accepted = false;
    for (; halvings <= config.max_halvings; ++halvings, step *= 0.5) {
      ScalarField trial = state.u;
      for (std::size_t k = 0; k < trial.values().size(); ++k)
        trial.values()[k] += step * delta(static_cast<Eigen::Index>(k));
      ScalarField trial_res = residual(trial, spec);
      const double norm = sup_norm(trial_res);
      if (!(norm < state.residual_norm)) continue;
      const double margin = convexity_margin(trial);
      if (!(margin > config.convexity_floor)) continue;
      state.u = std::move(trial);
      res = std::move(trial_res);
      state.residual_norm = norm;
      state.convexity_margin = margin;
      accepted = true;
      break;
    }
    ++state.iterations;
    if (!accepted) {
      state.log.push_back({state.iterations, state.residual_norm, halvings, 0.0, state.convexity_margin});
      state.status = SolveStatus::line_search_failed;
      std::ostringstream msg;
      msg << "no step after " << config.max_halvings << " halvings reduced the residual while keeping convexity";
      state.detail = msg.str();
      return state;
    }
    state.log.push_back({state.iterations, state.residual_norm, halvings, step, state.convexity_margin});
  }
}

ConvergenceStudy convergence_study(const std::string& name, const std::vector<int>& levels, double radius,
                                   const SolverConfig& config) {
  if (levels.size() < 2) throw InputError("convergence study needs at least two levels");
  const ManufacturedSolution exact = manufactured(name);
  ConvergenceStudy study;
  study.name = name;
  study.radius = radius;
  for (int n : levels) {
    const ProblemSpec spec = make_problem(exact, radius, n);
    const SolutionState state = newton_solve(spec, config);
    ConvergenceRow row;
    row.n_cells = n;
    row.h = spec.grid.spacing();
    row.iterations = state.iterations;
    row.residual = state.residual_norm;
    row.converged = state.converged;
    row.status = to_string(state.status);
    const ScalarField truth = ScalarField::sample(spec.grid, exact.u);
    for (std::size_t k = 0; k < truth.values().size(); ++k)
      row.sup_error = std::max(row.sup_error, std::abs(state.u.values()[k] - truth.values()[k]));
    if (!study.rows.empty() && row.sup_error > 0.0 && study.rows.back().sup_error > 0.0)
      row.order = std::log(study.rows.back().sup_error / row.sup_error) / std::log(study.rows.back().h / row.h);
    study.rows.push_back(row);
    if (!state.converged) return study;
  }
  study.complete = true;
  return study;
}

}  // namespace gclab
