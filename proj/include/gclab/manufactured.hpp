#pragma once

// Manufactured convex solutions of det hess u = f (1 + |grad u|^2)^2: an exact
// u* is chosen and f is whatever makes it a solution.

#include "gclab/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace gclab {

struct ManufacturedSolution {
  using ScalarFn = std::function<double(const Eigen::Vector2d&)>;
  using VectorFn = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
  using MatrixFn = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

  std::string name;
  ScalarFn u;
  VectorFn grad;
  MatrixFn hess;
  ScalarFn f;
  VectorFn grad_f;
  MatrixFn hess_f;

  /// Smallest eigenvalue of hess u* over all nodes of the grid.
  double min_hessian_eigenvalue(const Grid2D& grid) const;

  /// The rescaled solution u_mu(x) = mu u*(x / mu). Its data is
  /// f_mu(x) = f(x / mu) / mu^2, so mu = 1/sqrt(s) multiplies f by s on the
  /// correspondingly shrunk ball.
  ManufacturedSolution homothety(double mu) const;
};

/// Built-ins: "aniso-quadratic", "cosh", "radial-quadratic". Throws InputError
/// for any other name.
ManufacturedSolution manufactured(const std::string& name);

std::vector<std::string> manufactured_names();

}  // namespace gclab
