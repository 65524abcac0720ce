#include "gclab/grid.hpp"

#include "gclab/error.hpp"

#include <algorithm>
#include <cmath>

namespace gclab {

Grid2D::Grid2D(double half_width, int n_cells) : half_width_(half_width), n_cells_(n_cells) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw InputError("Grid2D: half width must be positive");
  if (n_cells < 16 || n_cells % 2 != 0) throw InputError("Grid2D: n_cells must be even and at least 16");
  spacing_ = 2.0 * half_width / n_cells;
}

int Grid2D::margin(int i, int j) const noexcept {
  return std::min({i, j, n_cells_ - i, n_cells_ - j});
}

ScalarField::ScalarField(const Grid2D& grid, double fill) : grid_(grid), values_(grid.node_count(), fill) {}

ScalarField::ScalarField(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) throw InputError("ScalarField: value count does not match grid");
}

ScalarField ScalarField::sample(const Grid2D& grid, const std::function<double(const Eigen::Vector2d&)>& fn) {
  ScalarField field(grid);
  const int n = grid.nodes_per_axis();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) field(i, j) = fn(grid.point(i, j));
  return field;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gclab
