#include "gclab/error.hpp"
#include "gclab/fieldcalc.hpp"
#include "gclab/manufactured.hpp"

#include <doctest.h>

#include <cmath>

using namespace gclab;

namespace {

double quadratic(const Eigen::Vector2d& x) { return 1.5 * x(0) * x(0) - 0.7 * x(0) * x(1) + 0.4 * x(1) * x(1) + x(0) - 2.0; }

double smooth(const Eigen::Vector2d& x) { return std::cosh(x(0)) + std::sin(x(1)) * x(0); }

Eigen::Matrix2d smooth_hessian(const Eigen::Vector2d& x) {
  Eigen::Matrix2d h;
  h << std::cosh(x(0)), std::cos(x(1)), std::cos(x(1)), -std::sin(x(1)) * x(0);
  return h;
}

// d u_pq / d x_c for `smooth`.
Eigen::Matrix2d smooth_third(const Eigen::Vector2d& x, int c) {
  Eigen::Matrix2d t;
  if (c == 0)
    t << std::sinh(x(0)), 0.0, 0.0, -std::sin(x(1));
  else
    t << 0.0, -std::sin(x(1)), -std::sin(x(1)), -std::cos(x(1)) * x(0);
  return t;
}

double hessian_error(int n) {
  const Grid2D grid(1.0, n);
  const ScalarField u = ScalarField::sample(grid, smooth);
  double worst = 0.0;
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i)
      worst = std::max(worst, (hessian_fd(u, i, j) - smooth_hessian(grid.point(i, j))).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("stencils are exact on quadratics") {
  const Grid2D grid(1.0, 16);
  const ScalarField u = ScalarField::sample(grid, quadratic);
  Eigen::Matrix2d h;
  h << 3.0, -0.7, -0.7, 0.8;
  for (int j = 1; j < 16; ++j)
    for (int i = 1; i < 16; ++i) {
      const Eigen::Vector2d x = grid.point(i, j);
      const Eigen::Vector2d g(3.0 * x(0) - 0.7 * x(1) + 1.0, -0.7 * x(0) + 0.8 * x(1));
      CHECK((gradient_fd(u, i, j) - g).norm() < 1e-13);
      CHECK((hessian_fd(u, i, j) - h).norm() < 1e-11);
    }
  const HessianField field(u);
  for (int j = 2; j < 15; ++j)
    for (int i = 2; i < 15; ++i) {
      const ThirdDerivatives t = third_fd(field, i, j);
      CHECK(t[0].cwiseAbs().maxCoeff() < 1e-9);
      CHECK(t[1].cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("hessian stencil is second-order on a smooth field") {
  const double e32 = hessian_error(32);
  const double e64 = hessian_error(64);
  const double e128 = hessian_error(128);
  CHECK(e64 < 1e-3);
  CHECK(e32 / e64 > 3.4);
  CHECK(e32 / e64 < 4.6);
  CHECK(e64 / e128 > 3.4);
  CHECK(e64 / e128 < 4.6);
}

TEST_CASE("stencils refuse nodes without margin") {
  const Grid2D grid(1.0, 16);
  const ScalarField u = ScalarField::sample(grid, smooth);
  CHECK_THROWS_AS(gradient_fd(u, 0, 5), DomainError);
  CHECK_THROWS_AS(hessian_fd(u, 5, 16), DomainError);
  const HessianField field(u);
  CHECK_FALSE(field.defined(0, 3));
  CHECK_THROWS_AS(field.at(0, 3), DomainError);
  CHECK_THROWS_AS(third_fd(field, 1, 5), DomainError);
  CHECK_THROWS_AS(fourth_fd(field, 5, 15), DomainError);
  CHECK_NOTHROW(third_fd(field, 2, 2));
}

TEST_CASE("cofactor is the derivative of det and diagonal in the eigenframe") {
  Eigen::Matrix2d h;
  h << 2.0, 0.3, 0.3, 1.1;
  const Eigen::Matrix2d f = cofactor(h);
  CHECK(f(0, 0) == 1.1);
  CHECK(f(1, 1) == 2.0);
  CHECK(f(0, 1) == -0.3);
  CHECK((f * h - h.determinant() * Eigen::Matrix2d::Identity()).norm() < 1e-14);

  const double e = 1e-6;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
      d(p, q) = e;
      const double fd = ((h + d).determinant() - (h - d).determinant()) / (2 * e);
      CHECK(std::abs(fd - f(p, q)) < 1e-9);
    }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  const Eigen::Matrix2d rotated = es.eigenvectors().transpose() * f * es.eigenvectors();
  CHECK(std::abs(rotated(0, 1)) < 1e-14);
  CHECK(rotated(0, 0) == doctest::Approx(es.eigenvalues()(1)));
  CHECK(rotated(1, 1) == doctest::Approx(es.eigenvalues()(0)));
}

TEST_CASE("third and fourth differences of the Hessian field") {
  const int n = 128;
  const Grid2D grid(1.0, n);
  const HessianField field(ScalarField::sample(grid, smooth));
  double third = 0.0;
  double fourth = 0.0;
  for (int j = 4; j <= n - 4; j += 3)
    for (int i = 4; i <= n - 4; i += 3) {
      const Eigen::Vector2d x = grid.point(i, j);
      const ThirdDerivatives t = third_fd(field, i, j);
      for (int c = 0; c < 2; ++c) third = std::max(third, (t[c] - smooth_third(x, c)).cwiseAbs().maxCoeff());
      const FourthDerivatives q = fourth_fd(field, i, j);
      // u_1111 = cosh x1, u_2222 = sin x2 x1, u_1122 = 0, u_1212 = 0.
      fourth = std::max(fourth, std::abs(q[0][0](0, 0) - std::cosh(x(0))));
      fourth = std::max(fourth, std::abs(q[1][1](1, 1) - std::sin(x(1)) * x(0)));
      fourth = std::max(fourth, std::abs(q[1][1](0, 0)));
      fourth = std::max(fourth, std::abs(q[0][1](0, 1) - q[1][0](0, 1)));
    }
  CHECK(third < 1e-3);
  CHECK(fourth < 1e-2);
}

TEST_CASE("gradient bound on convex examples") {
  for (const auto& name : manufactured_names()) {
    const ManufacturedSolution s = manufactured(name);
    const ScalarField u = ScalarField::sample(Grid2D(1.0, 64), s.u);
    const GradientBoundReport r = gradient_bound_check(u, 1.0);
    CHECK(r.convex);
    CHECK(r.holds);
    CHECK(r.sup_gradient <= r.bound + r.slack);
  }
  // Radial quadratic: sup |x| over |x| <= 1/2 is 1/2, osc is 1/2, bound 1.
  const GradientBoundReport r =
      gradient_bound_check(ScalarField::sample(Grid2D(1.0, 64), manufactured("radial-quadratic").u), 1.0);
  CHECK(r.sup_gradient == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.oscillation == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.bound == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient bound flags non-convex input") {
  const ScalarField u =
      ScalarField::sample(Grid2D(1.0, 32), [](const Eigen::Vector2d& x) { return x(0) * x(0) - x(1) * x(1); });
  const GradientBoundReport r = gradient_bound_check(u, 1.0);
  CHECK_FALSE(r.convex);
  CHECK(r.worst_eigenvalue == doctest::Approx(-2.0).epsilon(1e-9));
}
