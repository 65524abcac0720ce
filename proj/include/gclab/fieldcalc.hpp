#pragma once

// Second-order centered finite differences on Grid2D fields.
//
// Stencils, for spacing h:
//   u_i   = (u[+e_i] - u[-e_i]) / 2h
//   u_ii  = (u[+e_i] - 2u + u[-e_i]) / h^2
//   u_12  = (u[+e_1+e_2] - u[+e_1-e_2] - u[-e_1+e_2] + u[-e_1-e_2]) / 4h^2
// Third and fourth derivatives are centered differences of the discrete
// Hessian field, so they need a two-node margin.

#include "gclab/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace gclab {

Eigen::Vector2d gradient_fd(const ScalarField& u, int i, int j);
Eigen::Matrix2d hessian_fd(const ScalarField& u, int i, int j);

/// Cofactor matrix of a 2 x 2 Hessian: F11 = u22, F22 = u11, F12 = F21 = -u12.
/// It is the derivative of det with respect to each Hessian entry.
Eigen::Matrix2d cofactor(const Eigen::Matrix2d& hessian);

struct NodeDerivatives {
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cofactor = Eigen::Matrix2d::Zero();
};

/// Gradient, Hessian and cofactor at every node with a one-node margin.
class HessianField {
 public:
  explicit HessianField(const ScalarField& u);

  const Grid2D& grid() const noexcept { return grid_; }
  bool defined(int i, int j) const noexcept { return grid_.margin(i, j) >= 1; }
  /// Throws DomainError on the outermost ring.
  const NodeDerivatives& at(int i, int j) const;

 private:
  Grid2D grid_;
  std::vector<NodeDerivatives> nodes_;
};

/// third[c](p, q) = d u_pq / d x_c.
using ThirdDerivatives = std::array<Eigen::Matrix2d, 2>;
/// fourth[c][e](p, q) = d^2 u_pq / d x_c d x_e.
using FourthDerivatives = std::array<std::array<Eigen::Matrix2d, 2>, 2>;

ThirdDerivatives third_fd(const HessianField& hessians, int i, int j);
FourthDerivatives fourth_fd(const HessianField& hessians, int i, int j);

/// Outcome of the convex-function gradient bound
///   sup_{B_{R/2}} |grad u| <= 2 osc_{B_R} u / R,
/// checked on grid nodes with discretization slack C h, C = sup |hess u|.
struct GradientBoundReport {
  double sup_gradient = 0.0;   ///< over nodes with |x| <= R/2
  double oscillation = 0.0;    ///< over nodes with |x| <= R
  double bound = 0.0;          ///< 2 osc / R
  double slack = 0.0;          ///< C h
  bool holds = false;
  bool convex = true;
  double worst_eigenvalue = 0.0;  ///< smallest Hessian eigenvalue found
  int worst_i = -1;
  int worst_j = -1;
};

GradientBoundReport gradient_bound_check(const ScalarField& u, double radius);

}  // namespace gclab
