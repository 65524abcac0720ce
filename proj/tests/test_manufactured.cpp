#include "gclab/error.hpp"
#include "gclab/manufactured.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gclab;

namespace {

std::vector<Eigen::Vector2d> sample_points(std::uint64_t seed, int count, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  std::vector<Eigen::Vector2d> pts;
  while (static_cast<int>(pts.size()) < count) {
    const Eigen::Vector2d x(coord(rng), coord(rng));
    if (x.norm() <= radius) pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("closed-form values") {
  const ManufacturedSolution a = manufactured("aniso-quadratic");
  CHECK(a.f(Eigen::Vector2d::Zero()) == 2.0);
  CHECK(a.f(Eigen::Vector2d(0.5, 0.0)) == doctest::Approx(0.5));
  CHECK(a.u(Eigen::Vector2d(1.0, 2.0)) == 3.0);

  const ManufacturedSolution c = manufactured("cosh");
  CHECK(c.f(Eigen::Vector2d::Zero()) == 1.0);
  CHECK(c.f(Eigen::Vector2d(0.0, 1.0)) == 0.25);
  CHECK(c.u(Eigen::Vector2d::Zero()) == 1.0);

  const ManufacturedSolution r = manufactured("radial-quadratic");
  CHECK(r.f(Eigen::Vector2d(1.0, 0.0)) == 0.25);
  CHECK(r.hess(Eigen::Vector2d(0.3, -0.2)) == Eigen::Matrix2d::Identity());
}

TEST_CASE("every built-in solves its own equation") {
  for (const auto& name : manufactured_names()) {
    const ManufacturedSolution s = manufactured(name);
    for (const auto& x : sample_points(7, 200, 1.0)) {
      const double q = 1.0 + s.grad(x).squaredNorm();
      const double rhs = s.f(x) * q * q;
      CHECK(std::abs(s.hess(x).determinant() - rhs) < 1e-13 * (1.0 + rhs));
      CHECK(s.f(x) > 0.0);
      CHECK(s.hess(x).eigenvalues().real().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  for (const auto& name : manufactured_names()) {
    const ManufacturedSolution s = manufactured(name);
    const double e = 1e-5;
    for (const auto& x : sample_points(13, 50, 1.0)) {
      for (int c = 0; c < 2; ++c) {
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        d(c) = e;
        CHECK(std::abs((s.u(x + d) - s.u(x - d)) / (2 * e) - s.grad(x)(c)) < 1e-8);
        CHECK(((s.grad(x + d) - s.grad(x - d)) / (2 * e) - s.hess(x).col(c)).norm() < 1e-8);
        CHECK(std::abs((s.f(x + d) - s.f(x - d)) / (2 * e) - s.grad_f(x)(c)) < 1e-8);
        CHECK(((s.grad_f(x + d) - s.grad_f(x - d)) / (2 * e) - s.hess_f(x).col(c)).norm() < 1e-7);
      }
      CHECK((s.hess_f(x) - s.hess_f(x).transpose()).norm() <= 1e-14 * (1.0 + s.hess_f(x).norm()));
    }
  }
}

TEST_CASE("homothety rescales f by 1/mu^2") {
  const ManufacturedSolution base = manufactured("cosh");
  const double mu = 0.5;
  const ManufacturedSolution s = base.homothety(mu);
  for (const auto& x : sample_points(3, 50, 0.5)) {
    CHECK(s.u(x) == doctest::Approx(mu * base.u(x / mu)));
    CHECK(s.f(x) == doctest::Approx(4.0 * base.f(x / mu)));
    const double q = 1.0 + s.grad(x).squaredNorm();
    CHECK(std::abs(s.hess(x).determinant() - s.f(x) * q * q) < 1e-12 * (1.0 + s.f(x) * q * q));
    const double e = 1e-5;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d d = Eigen::Vector2d::Zero();
      d(c) = e;
      CHECK(std::abs((s.f(x + d) - s.f(x - d)) / (2 * e) - s.grad_f(x)(c)) < 1e-6);
      CHECK(((s.grad_f(x + d) - s.grad_f(x - d)) / (2 * e) - s.hess_f(x).col(c)).norm() < 1e-5);
    }
  }
  CHECK_THROWS_AS(base.homothety(0.0), InputError);
  CHECK_THROWS_AS(base.homothety(-1.0), InputError);
}

TEST_CASE("minimum Hessian eigenvalue over a grid") {
  CHECK(manufactured("aniso-quadratic").min_hessian_eigenvalue(Grid2D(1.0, 16)) == 1.0);
  CHECK(manufactured("cosh").min_hessian_eigenvalue(Grid2D(1.0, 16)) == doctest::Approx(1.0));
}

TEST_CASE("unknown names are rejected") {
  CHECK_THROWS_AS(manufactured("paraboloid"), InputError);
  CHECK(manufactured_names().size() == 3);
}
