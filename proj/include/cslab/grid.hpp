#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace cslab {

/// Periodic, cell-centered sampling of the box [-L, L)^dim.
///
/// Sample i along an axis sits at -L + (i + 1/2) * spacing, so no sample
/// coincides with the origin. Frequencies are pi*k/L for k in
/// {-N/2, ..., N/2 - 1}, listed in ascending order.
struct Grid {
  int dim = 3;
  int points_per_axis = 0;
  double box_half_width = 0.0;
  double spacing = 0.0;
  std::vector<double> frequencies;

  std::size_t size() const;
  double coordinate(int index) const {
    return -box_half_width + (index + 0.5) * spacing;
  }
  /// Frequency of FFT bin `bin` (0..N-1, FFTW ordering).
  double bin_frequency(int bin) const;
  double cell_volume() const;
  double frequency_cell_volume() const;
  std::array<int, 3> unflatten(std::size_t flat) const;

  bool operator==(const Grid& other) const {
    return dim == other.dim && points_per_axis == other.points_per_axis &&
           box_half_width == other.box_half_width;
  }
};

/// Throws ConfigError for odd or too small N and non-positive L.
Grid make_grid(int dim, double box_half_width, int points_per_axis);

/// Visits every sample of a 3-D grid with its position and flat index.
template <typename Fn>
void for_each_point(const Grid& grid, Fn&& fn) {
  const int n = grid.points_per_axis;
  std::vector<double> axis(n);
  for (int i = 0; i < n; ++i) axis[i] = grid.coordinate(i);
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++flat) fn(flat, axis[i], axis[j], axis[k]);
}

/// Same as for_each_point but in frequency space, using FFT bin ordering.
template <typename Fn>
void for_each_frequency(const Grid& grid, Fn&& fn) {
  const int n = grid.points_per_axis;
  std::vector<double> axis(n);
  for (int i = 0; i < n; ++i) axis[i] = grid.bin_frequency(i);
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++flat) fn(flat, axis[i], axis[j], axis[k]);
}

}  // namespace cslab
