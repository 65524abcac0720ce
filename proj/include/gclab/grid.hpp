#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace gclab {

/// Uniform node grid on the square [-a, a]^2 with an even number of cells per
/// axis, so that the origin is a node. Node (i, j) sits at
/// ((i - n/2) h, (j - n/2) h).
class Grid2D {
 public:
  /// Throws InputError unless a > 0 and n_cells is even and >= 16.
  Grid2D(double half_width, int n_cells);

  double half_width() const noexcept { return half_width_; }
  int n_cells() const noexcept { return n_cells_; }
  int nodes_per_axis() const noexcept { return n_cells_ + 1; }
  std::size_t node_count() const noexcept {
    return static_cast<std::size_t>(nodes_per_axis()) * static_cast<std::size_t>(nodes_per_axis());
  }
  double spacing() const noexcept { return spacing_; }

  double coordinate(int i) const noexcept { return (i - n_cells_ / 2) * spacing_; }
  Eigen::Vector2d point(int i, int j) const noexcept { return {coordinate(i), coordinate(j)}; }
  int center() const noexcept { return n_cells_ / 2; }

  /// Distance, in nodes, from (i, j) to the outermost ring.
  int margin(int i, int j) const noexcept;

  /// Flat index; x1 varies fastest.
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes_per_axis()) + static_cast<std::size_t>(i);
  }

  bool operator==(const Grid2D& other) const noexcept {
    return half_width_ == other.half_width_ && n_cells_ == other.n_cells_;
  }

 private:
  double half_width_;
  int n_cells_;
  double spacing_;
};

/// Node values on a Grid2D.
class ScalarField {
 public:
  explicit ScalarField(const Grid2D& grid, double fill = 0.0);
  ScalarField(const Grid2D& grid, std::vector<double> values);

  static ScalarField sample(const Grid2D& grid, const std::function<double(const Eigen::Vector2d&)>& fn);

  const Grid2D& grid() const noexcept { return grid_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  bool all_finite() const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

}  // namespace gclab
