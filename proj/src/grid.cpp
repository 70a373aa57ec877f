#include "cslab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cslab/error.hpp"

namespace cslab {

Grid make_grid(int dim, double box_half_width, int points_per_axis) {
  if (dim != 3) throw ConfigError("grid dimension must be 3, got " + std::to_string(dim));
  if (points_per_axis % 2 != 0)
    throw ConfigError("points per axis must be even, got " + std::to_string(points_per_axis));
  if (points_per_axis < 8)
    throw ConfigError("points per axis must be at least 8, got " + std::to_string(points_per_axis));
  if (!(box_half_width > 0.0) || !std::isfinite(box_half_width))
    throw ConfigError("box half width must be positive");

  Grid g;
  g.dim = dim;
  g.points_per_axis = points_per_axis;
  g.box_half_width = box_half_width;
  g.spacing = 2.0 * box_half_width / points_per_axis;
  g.frequencies.reserve(points_per_axis);
  for (int k = -points_per_axis / 2; k < points_per_axis / 2; ++k)
    g.frequencies.push_back(std::numbers::pi * k / box_half_width);
  return g;
}

std::size_t Grid::size() const {
  const auto n = static_cast<std::size_t>(points_per_axis);
  return n * n * n;
}

double Grid::bin_frequency(int bin) const {
  const int k = bin < points_per_axis / 2 ? bin : bin - points_per_axis;
  return std::numbers::pi * k / box_half_width;
}

double Grid::cell_volume() const { return spacing * spacing * spacing; }

double Grid::frequency_cell_volume() const {
  const double dk = std::numbers::pi / box_half_width;
  return dk * dk * dk;
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  const auto n = static_cast<std::size_t>(points_per_axis);
  return {static_cast<int>(flat / (n * n)), static_cast<int>((flat / n) % n),
          static_cast<int>(flat % n)};
}

}  // namespace cslab
