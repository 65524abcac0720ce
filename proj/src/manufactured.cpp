#include "gclab/manufactured.hpp"

#include "gclab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gclab {

namespace {

using Vec = Eigen::Vector2d;
using Mat = Eigen::Matrix2d;

Mat symmetric(double a, double b, double d) {
  Mat m;
  m << a, b, b, d;
  return m;
}

// u = x1^2 + x2^2 / 2, q = 1 + 4 x1^2 + x2^2, f = 2 / q^2.
ManufacturedSolution aniso_quadratic() {
  ManufacturedSolution s;
  s.name = "aniso-quadratic";
  s.u = [](const Vec& x) { return x(0) * x(0) + 0.5 * x(1) * x(1); };
  s.grad = [](const Vec& x) { return Vec(2.0 * x(0), x(1)); };
  s.hess = [](const Vec&) { return symmetric(2.0, 0.0, 1.0); };
  s.f = [](const Vec& x) {
    const double q = 1.0 + 4.0 * x(0) * x(0) + x(1) * x(1);
    return 2.0 / (q * q);
  };
  s.grad_f = [](const Vec& x) {
    const double q = 1.0 + 4.0 * x(0) * x(0) + x(1) * x(1);
    const double q3 = q * q * q;
    return Vec(-32.0 * x(0) / q3, -8.0 * x(1) / q3);
  };
  s.hess_f = [](const Vec& x) {
    const double q = 1.0 + 4.0 * x(0) * x(0) + x(1) * x(1);
    const double q3 = q * q * q;
    const double q4 = q3 * q;
    return symmetric(-32.0 / q3 + 768.0 * x(0) * x(0) / q4, 192.0 * x(0) * x(1) / q4,
                     -8.0 / q3 + 48.0 * x(1) * x(1) / q4);
  };
  return s;
}

// u = cosh x1 + x2^2 / 2, D = cosh^2 x1 + x2^2 = 1 + |grad u|^2, f = cosh x1 / D^2.
ManufacturedSolution cosh_solution() {
  ManufacturedSolution s;
  s.name = "cosh";
  s.u = [](const Vec& x) { return std::cosh(x(0)) + 0.5 * x(1) * x(1); };
  s.grad = [](const Vec& x) { return Vec(std::sinh(x(0)), x(1)); };
  s.hess = [](const Vec& x) { return symmetric(std::cosh(x(0)), 0.0, 1.0); };
  s.f = [](const Vec& x) {
    const double c = std::cosh(x(0));
    const double d = c * c + x(1) * x(1);
    return c / (d * d);
  };
  s.grad_f = [](const Vec& x) {
    const double c = std::cosh(x(0));
    const double sh = std::sinh(x(0));
    const double d = c * c + x(1) * x(1);
    const double d2 = d * d;
    const double d3 = d2 * d;
    return Vec(sh / d2 - 4.0 * c * c * sh / d3, -4.0 * c * x(1) / d3);
  };
  s.hess_f = [](const Vec& x) {
    const double c = std::cosh(x(0));
    const double sh = std::sinh(x(0));
    const double y = x(1);
    const double d = c * c + y * y;
    const double d2 = d * d;
    const double d3 = d2 * d;
    const double d4 = d3 * d;
    const double f11 = c / d2 - (12.0 * c * sh * sh + 4.0 * c * c * c) / d3 + 24.0 * c * c * c * sh * sh / d4;
    const double f22 = -4.0 * c / d3 + 24.0 * c * y * y / d4;
    const double f12 = -4.0 * sh * y / d3 + 24.0 * c * c * sh * y / d4;
    return symmetric(f11, f12, f22);
  };
  return s;
}

// u = |x|^2 / 2, q = 1 + |x|^2, f = 1 / q^2. Hessian is the identity.
ManufacturedSolution radial_quadratic() {
  ManufacturedSolution s;
  s.name = "radial-quadratic";
  s.u = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  s.grad = [](const Vec& x) { return x; };
  s.hess = [](const Vec&) { return Mat::Identity().eval(); };
  s.f = [](const Vec& x) {
    const double q = 1.0 + x.squaredNorm();
    return 1.0 / (q * q);
  };
  s.grad_f = [](const Vec& x) {
    const double q = 1.0 + x.squaredNorm();
    return Vec(-4.0 * x / (q * q * q));
  };
  s.hess_f = [](const Vec& x) {
    const double q = 1.0 + x.squaredNorm();
    const double q3 = q * q * q;
    return Mat(-4.0 / q3 * Mat::Identity() + 24.0 / (q3 * q) * x * x.transpose());
  };
  return s;
}

}  // namespace

double ManufacturedSolution::min_hessian_eigenvalue(const Grid2D& grid) const {
  double lowest = std::numeric_limits<double>::infinity();
  const int n = grid.nodes_per_axis();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Mat h = hess(grid.point(i, j));
      const double mean = 0.5 * (h(0, 0) + h(1, 1));
      const double radius = std::hypot(0.5 * (h(0, 0) - h(1, 1)), h(0, 1));
      lowest = std::min(lowest, mean - radius);
    }
  return lowest;
}

ManufacturedSolution ManufacturedSolution::homothety(double mu) const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("homothety: scale must be positive");
  ManufacturedSolution base = *this;
  ManufacturedSolution s;
  s.name = name;
  s.u = [base, mu](const Vec& x) { return mu * base.u(x / mu); };
  s.grad = [base, mu](const Vec& x) { return base.grad(x / mu); };
  s.hess = [base, mu](const Vec& x) { return Mat(base.hess(x / mu) / mu); };
  s.f = [base, mu](const Vec& x) { return base.f(x / mu) / (mu * mu); };
  s.grad_f = [base, mu](const Vec& x) { return Vec(base.grad_f(x / mu) / (mu * mu * mu)); };
  s.hess_f = [base, mu](const Vec& x) { return Mat(base.hess_f(x / mu) / (mu * mu * mu * mu)); };
  return s;
}

ManufacturedSolution manufactured(const std::string& name) {
  if (name == "aniso-quadratic") return aniso_quadratic();
  if (name == "cosh") return cosh_solution();
  if (name == "radial-quadratic") return radial_quadratic();
  throw InputError("unknown manufactured solution '" + name + "'");
}

std::vector<std::string> manufactured_names() { return {"aniso-quadratic", "cosh", "radial-quadratic"}; }

}  // namespace gclab
