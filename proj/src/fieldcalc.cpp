#include "gclab/fieldcalc.hpp"

#include "gclab/error.hpp"
#include "gclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gclab {

namespace {

void require_margin(const Grid2D& grid, int i, int j, int needed, const char* what) {
  const int n = grid.n_cells();
  if (i < 0 || j < 0 || i > n || j > n || grid.margin(i, j) < needed) {
    std::ostringstream msg;
    msg << what << ": node (" << i << ", " << j << ") needs a margin of " << needed;
    throw DomainError(msg.str());
  }
}

double smaller_eigenvalue(const Eigen::Matrix2d& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double radius = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
  return mean - radius;
}

}  // namespace

Eigen::Vector2d gradient_fd(const ScalarField& u, int i, int j) {
  require_margin(u.grid(), i, j, 1, "gradient_fd");
  const double h = u.grid().spacing();
  return {(u(i + 1, j) - u(i - 1, j)) / (2.0 * h), (u(i, j + 1) - u(i, j - 1)) / (2.0 * h)};
}

Eigen::Matrix2d hessian_fd(const ScalarField& u, int i, int j) {
  require_margin(u.grid(), i, j, 1, "hessian_fd");
  const double h = u.grid().spacing();
  const double h2 = h * h;
  const double c = u(i, j);
  Eigen::Matrix2d hess;
  hess(0, 0) = (u(i + 1, j) - 2.0 * c + u(i - 1, j)) / h2;
  hess(1, 1) = (u(i, j + 1) - 2.0 * c + u(i, j - 1)) / h2;
  hess(0, 1) = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) / (4.0 * h2);
  hess(1, 0) = hess(0, 1);
  return hess;
}

Eigen::Matrix2d cofactor(const Eigen::Matrix2d& hessian) {
  Eigen::Matrix2d f;
  f(0, 0) = hessian(1, 1);
  f(1, 1) = hessian(0, 0);
  f(0, 1) = -hessian(0, 1);
  f(1, 0) = -hessian(1, 0);
  return f;
}

HessianField::HessianField(const ScalarField& u) : grid_(u.grid()), nodes_(u.grid().node_count()) {
  const int n = grid_.n_cells();
  parallel_for(1, n, [&](int j) {
    for (int i = 1; i < n; ++i) {
      NodeDerivatives& d = nodes_[grid_.index(i, j)];
      d.gradient = gradient_fd(u, i, j);
      d.hessian = hessian_fd(u, i, j);
      d.cofactor = cofactor(d.hessian);
    }
  });
}

const NodeDerivatives& HessianField::at(int i, int j) const {
  require_margin(grid_, i, j, 1, "HessianField");
  return nodes_[grid_.index(i, j)];
}

ThirdDerivatives third_fd(const HessianField& hessians, int i, int j) {
  require_margin(hessians.grid(), i, j, 2, "third_fd");
  const double h = hessians.grid().spacing();
  ThirdDerivatives t;
  t[0] = (hessians.at(i + 1, j).hessian - hessians.at(i - 1, j).hessian) / (2.0 * h);
  t[1] = (hessians.at(i, j + 1).hessian - hessians.at(i, j - 1).hessian) / (2.0 * h);
  return t;
}

FourthDerivatives fourth_fd(const HessianField& hessians, int i, int j) {
  require_margin(hessians.grid(), i, j, 2, "fourth_fd");
  const double h = hessians.grid().spacing();
  const double h2 = h * h;
  auto hs = [&](int a, int b) -> const Eigen::Matrix2d& { return hessians.at(a, b).hessian; };
  FourthDerivatives f;
  f[0][0] = (hs(i + 1, j) - 2.0 * hs(i, j) + hs(i - 1, j)) / h2;
  f[1][1] = (hs(i, j + 1) - 2.0 * hs(i, j) + hs(i, j - 1)) / h2;
  f[0][1] = (hs(i + 1, j + 1) - hs(i + 1, j - 1) - hs(i - 1, j + 1) + hs(i - 1, j - 1)) / (4.0 * h2);
  f[1][0] = f[0][1];
  return f;
}

GradientBoundReport gradient_bound_check(const ScalarField& u, double radius) {
  if (!(radius > 0.0)) throw InputError("gradient_bound_check: radius must be positive");
  const Grid2D& grid = u.grid();
  const HessianField hessians(u);
  const int n = grid.n_cells();

  GradientBoundReport report;
  report.worst_eigenvalue = std::numeric_limits<double>::infinity();
  double max_u = -std::numeric_limits<double>::infinity();
  double min_u = std::numeric_limits<double>::infinity();
  double max_hessian_norm = 0.0;
  const double half = 0.5 * radius;

  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const Eigen::Vector2d x = grid.point(i, j);
      const double r = x.norm();
      if (r <= radius) {
        max_u = std::max(max_u, u(i, j));
        min_u = std::min(min_u, u(i, j));
      }
      if (!hessians.defined(i, j)) continue;
      const NodeDerivatives& d = hessians.at(i, j);
      const double low = smaller_eigenvalue(d.hessian);
      if (low < report.worst_eigenvalue) {
        report.worst_eigenvalue = low;
        report.worst_i = i;
        report.worst_j = j;
      }
      if (r <= radius) {
        const double top = std::max(std::abs(low), std::abs(d.hessian.trace() - low));
        max_hessian_norm = std::max(max_hessian_norm, top);
      }
      if (r <= half) report.sup_gradient = std::max(report.sup_gradient, d.gradient.norm());
    }

  report.convex = report.worst_eigenvalue >= -1e-10;
  report.oscillation = max_u - min_u;
  report.bound = 2.0 * report.oscillation / radius;
  report.slack = max_hessian_norm * grid.spacing();
  report.holds = report.convex && report.sup_gradient <= report.bound + report.slack;
  return report;
}

}  // namespace gclab
