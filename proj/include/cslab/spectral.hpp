#pragma once

#include <array>
#include <span>
#include <vector>

#include "cslab/field.hpp"
#include "cslab/grid.hpp"

namespace cslab {

enum class Direction { forward, inverse };

/// Unitary Fourier transform with symbol e^{-i xi.x}, discretized on the grid.
///
/// forward maps a space-domain field to samples of its transform on the
/// frequency lattice; inverse undoes it exactly.
Field transform_pair(const Field& field, Direction direction);

/// Applies the Fourier multiplier |xi|^s, 0 <= s <= 2.
Field fractional_derivative(const Field& field, double s);

/// -Laplacian via the |xi|^2 symbol.
Field minus_laplacian(const Field& field);

/// Spectral gradient. The Nyquist bin of each first derivative is zeroed.
std::array<Field, 3> gradient(const Field& field);

/// Pointwise decomposition of |grad u|^2 into radial and tangential parts.
struct GradientSplit {
  Field radial_derivative;            // d_r u = (x/|x|) . grad u
  std::vector<double> radial_sq;      // |d_r u|^2
  std::vector<double> tangential_sq;  // |grad u|^2 - |d_r u|^2
  std::vector<double> gradient_sq;    // |grad u|^2
};

/// At a sample exactly on the origin the radial part is 0 and the whole
/// gradient is counted as tangential.
GradientSplit gradient_split(const Field& field);

struct NormKind {
  enum class Tag { l2, hdot, weighted_l2, lp };
  Tag tag = Tag::l2;
  double parameter = 0.0;

  static NormKind l2() { return {Tag::l2, 0.0}; }
  /// Homogeneous Sobolev norm with s in [0, 2].
  static NormKind hdot(double s);
  /// (int |x|^k |f|^2)^{1/2} with k in {1, 2}.
  static NormKind weighted(double k);
  /// Spatial L^p, p >= 1.
  static NormKind lp(double p);
};

double compute_norm(const Field& field, NormKind kind);

/// (int ||u(t)||_{L^q}^p dt)^{1/p} by the trapezoid rule over the snapshots;
/// p = infinity takes the max over snapshots.
double spacetime_norm(std::span<const Field> snapshots, double p_time, double q_space);

/// Integral of a real density over the grid.
double integrate(const Grid& grid, std::span<const double> density);

/// Radius |x| at every sample.
std::vector<double> radii(const Grid& grid);

}  // namespace cslab
