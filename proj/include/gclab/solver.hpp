#pragma once

// Damped Newton solver for the discrete prescribed Gauss curvature equation
//   N(u) = det hess_h u - f (1 + |grad_h u|^2)^2 = 0
// on a square grid with Dirichlet data on the outer two node rings.

#include "gclab/grid.hpp"
#include "gclab/manufactured.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gclab {

struct ProblemSpec {
  double radius = 1.0;
  Grid2D grid{1.0, 16};
  ScalarField f{grid};
  /// Exact values; only the two outer rings are used as boundary data.
  ScalarField boundary{grid};
  /// Bounds m <= f <= M measured over nodes in the closed ball of `radius`.
  double m = 0.0;
  double M = 0.0;
  std::optional<ManufacturedSolution> exact;

  /// Nodes with margin >= 2 carry the equation; the rest are boundary.
  bool is_interior(int i, int j) const noexcept { return grid.margin(i, j) >= 2; }
};

/// Problem on [-a, a]^2 (a = radius when half_width <= 0) with data sampled
/// from a manufactured solution. Throws InputError if f is not positive.
ProblemSpec make_problem(const ManufacturedSolution& solution, double radius, int n_cells, double half_width = 0.0);

enum class InitialGuess { exact_perturbed, quadratic_fit };

InitialGuess parse_initial_guess(const std::string& name);
std::string to_string(InitialGuess guess);

struct SolverConfig {
  int max_iterations = 50;
  double residual_tolerance = 1e-10;
  int max_halvings = 30;
  double convexity_floor = -1e-8;
  InitialGuess initial_guess = InitialGuess::exact_perturbed;
  double perturbation_amplitude = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  int halvings = 0;
  double step = 0.0;
  double convexity_margin = 0.0;
};

enum class SolveStatus { converged, max_iterations, singular_jacobian, line_search_failed, non_finite };

std::string to_string(SolveStatus status);

struct SolutionState {
  explicit SolutionState(ScalarField field) : u(std::move(field)) {}

  ScalarField u;
  double residual_norm = 0.0;
  int iterations = 0;
  double convexity_margin = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::string detail;
  std::vector<IterationRecord> log;
};

/// Interior: N(u). Boundary rings: u - boundary data.
ScalarField residual(const ScalarField& u, const ProblemSpec& spec);

double sup_norm(const ScalarField& field);

/// Smallest Hessian eigenvalue over nodes with a one-node margin.
double convexity_margin(const ScalarField& u);

/// Derivative of residual(u) with respect to the node values of u.
Eigen::SparseMatrix<double> jacobian_assemble(const ScalarField& u, const ProblemSpec& spec);

/// Starting iterate for the configured strategy, boundary rings set exactly.
ScalarField initial_guess(const ProblemSpec& spec, const SolverConfig& config);

SolutionState newton_solve(const ProblemSpec& spec, const SolverConfig& config);
SolutionState newton_solve(const ProblemSpec& spec, const SolverConfig& config, ScalarField start);

struct ConvergenceRow {
  int n_cells = 0;
  double h = 0.0;
  double sup_error = 0.0;
  std::optional<double> order;  ///< against the previous level
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::string status;
};

struct ConvergenceStudy {
  std::string name;
  double radius = 1.0;
  std::vector<ConvergenceRow> rows;
  bool complete = false;  ///< false if some level failed; rows stop there
};

/// Throws InputError for fewer than two levels.
ConvergenceStudy convergence_study(const std::string& name, const std::vector<int>& levels, double radius,
                                   const SolverConfig& config);

}  // namespace gclab
