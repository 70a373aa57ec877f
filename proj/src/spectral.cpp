#include "cslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cslab/error.hpp"
#include "cslab/fft.hpp"

namespace cslab {
namespace {

Field to_space(const Field& f) {
  return f.domain() == Domain::space ? f : transform_pair(f, Direction::inverse);
}

void require_space(const Field& f, const char* what) {
  if (f.domain() != Domain::space)
    throw ConfigError(std::string(what) + ": expected a space-domain field");
}

// Per-axis factor e^{-i xi_k x_0} linking FFT bins to the continuous
// transform on the cell-centered grid.
std::vector<Complex> axis_phase(const Grid& g) {
  const int n = g.points_per_axis;
  const double x0 = g.coordinate(0);
  std::vector<Complex> p(n);
  for (int k = 0; k < n; ++k) p[k] = std::polar(1.0, -g.bin_frequency(k) * x0);
  return p;
}

template <typename Symbol>
Field apply_multiplier(const Field& in, Symbol&& symbol) {
  require_space(in, "spectral multiplier");
  Field out = in;
  const Fft3 fft(in.grid().points_per_axis);
  fft.forward(out.values());
  for_each_frequency(in.grid(), [&](std::size_t idx, double kx, double ky, double kz) {
    out[idx] *= symbol(kx, ky, kz);
  });
  fft.inverse(out.values());
  return out;
}

}  // namespace

Field transform_pair(const Field& field, Direction direction) {
  const Grid& g = field.grid();
  const int n = g.points_per_axis;
  const Fft3 fft(n);
  const auto phase = axis_phase(g);
  const double scale = g.cell_volume() / std::pow(2.0 * std::numbers::pi, 1.5);
  Field out = field;

  if (direction == Direction::forward) {
    if (field.domain() != Domain::space) throw ConfigError("forward transform of a frequency field");
    fft.forward(out.values());
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Complex pij = phase[i] * phase[j] * scale;
        for (int k = 0; k < n; ++k, ++idx) out[idx] *= pij * phase[k];
      }
    out.set_domain(Domain::frequency);
    return out;
  }

  if (field.domain() != Domain::frequency) throw ConfigError("inverse transform of a space field");
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex pij = std::conj(phase[i] * phase[j]) / scale;
      for (int k = 0; k < n; ++k, ++idx) out[idx] *= pij * std::conj(phase[k]);
    }
  fft.inverse(out.values());
  out.set_domain(Domain::space);
  return out;
}

Field fractional_derivative(const Field& field, double s) {
  if (!(s >= 0.0 && s <= 2.0))
    throw ConfigError("fractional derivative order must lie in [0, 2], got " + std::to_string(s));
  if (s == 0.0) return field;
  return apply_multiplier(field, [s](double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    return k2 == 0.0 ? 0.0 : std::pow(k2, 0.5 * s);
  });
}

Field minus_laplacian(const Field& field) {
  return apply_multiplier(field, [](double kx, double ky, double kz) {
    return kx * kx + ky * ky + kz * kz;
  });
}

std::array<Field, 3> gradient(const Field& field) {
  require_space(field, "gradient");
  const Grid& g = field.grid();
  const int n = g.points_per_axis;
  const Fft3 fft(n);
  Field spectrum = field;
  fft.forward(spectrum.values());

  std::vector<double> k(n);
  for (int b = 0; b < n; ++b) k[b] = (b == n / 2) ? 0.0 : g.bin_frequency(b);

  std::array<Field, 3> out{spectrum, spectrum, spectrum};
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx) {
        const Complex s = spectrum[idx];
        out[0][idx] = Complex(-s.imag(), s.real()) * k[i];
        out[1][idx] = Complex(-s.imag(), s.real()) * k[j];
        out[2][idx] = Complex(-s.imag(), s.real()) * k[l];
      }
  for (auto& comp : out) {
    fft.inverse(comp.values());
    comp.set_time(field.time());
  }
  return out;
}

GradientSplit gradient_split(const Field& field) {
  const auto grad = gradient(field);
  const Grid& g = field.grid();
  GradientSplit split{Field(g, field.time()), std::vector<double>(g.size()),
                      std::vector<double>(g.size()), std::vector<double>(g.size())};
  const double origin_tol = 1e-14 * g.box_half_width;
  for_each_point(g, [&](std::size_t idx, double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const double full = std::norm(grad[0][idx]) + std::norm(grad[1][idx]) + std::norm(grad[2][idx]);
    split.gradient_sq[idx] = full;
    if (r <= origin_tol) {
      split.radial_derivative[idx] = 0.0;
      split.radial_sq[idx] = 0.0;
      split.tangential_sq[idx] = full;
      return;
    }
    const Complex dr = (x * grad[0][idx] + y * grad[1][idx] + z * grad[2][idx]) / r;
    split.radial_derivative[idx] = dr;
    const double rad = std::norm(dr);
    split.radial_sq[idx] = rad;
    split.tangential_sq[idx] = std::max(0.0, full - rad);
  });
  return split;
}

NormKind NormKind::hdot(double s) {
  if (!(s >= 0.0 && s <= 2.0)) throw ConfigError("HdotS order must lie in [0, 2]");
  return {Tag::hdot, s};
}

NormKind NormKind::weighted(double k) {
  if (k != 1.0 && k != 2.0) throw ConfigError("weighted L2 power must be 1 or 2");
  return {Tag::weighted_l2, k};
}

NormKind NormKind::lp(double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p exponent must be >= 1");
  return {Tag::lp, p};
}

double integrate(const Grid& grid, std::span<const double> density) {
  double acc = 0.0;
  for (double v : density) acc += v;
  return acc * grid.cell_volume();
}

std::vector<double> radii(const Grid& grid) {
  std::vector<double> r(grid.size());
  for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
    r[idx] = std::sqrt(x * x + y * y + z * z);
  });
  return r;
}

double compute_norm(const Field& field, NormKind kind) {
  const Grid& g = field.grid();
  switch (kind.tag) {
    case NormKind::Tag::l2: {
      double acc = 0.0;
      for (const auto& v : field.values()) acc += std::norm(v);
      const double vol =
          field.domain() == Domain::space ? g.cell_volume() : g.frequency_cell_volume();
      return std::sqrt(acc * vol);
    }
    case NormKind::Tag::hdot: {
      const double s = kind.parameter;
      Field spectrum = field.domain() == Domain::frequency
                           ? field
                           : transform_pair(field, Direction::forward);
      double acc = 0.0;
      for_each_frequency(g, [&](std::size_t idx, double kx, double ky, double kz) {
        const double k2 = kx * kx + ky * ky + kz * kz;
        const double w = s == 0.0 ? 1.0 : (k2 == 0.0 ? 0.0 : std::pow(k2, s));
        acc += w * std::norm(spectrum[idx]);
      });
      return std::sqrt(acc * g.frequency_cell_volume());
    }
    case NormKind::Tag::weighted_l2: {
      const Field u = to_space(field);
      double acc = 0.0;
      const bool squared = kind.parameter == 2.0;
      for_each_point(g, [&](std::size_t idx, double x, double y, double z) {
        const double r2 = x * x + y * y + z * z;
        acc += (squared ? r2 : std::sqrt(r2)) * std::norm(u[idx]);
      });
      return std::sqrt(acc * g.cell_volume());
    }
    case NormKind::Tag::lp: {
      const Field u = to_space(field);
      const double p = kind.parameter;
      double acc = 0.0;
      for (const auto& v : u.values()) acc += std::pow(std::abs(v), p);
      return std::pow(acc * g.cell_volume(), 1.0 / p);
    }
  }
  return 0.0;
}

double spacetime_norm(std::span<const Field> snapshots, double p_time, double q_space) {
  const bool sup = std::isinf(p_time);
  if (snapshots.empty()) throw ConfigError("spacetime norm needs at least one snapshot");
  if (!sup && snapshots.size() < 2)
    throw ConfigError("spacetime norm needs at least 2 snapshots for a finite time exponent");
  if (!sup && !(p_time >= 1.0)) throw ConfigError("time exponent must be >= 1");

  if (snapshots.size() >= 2 && snapshots[1].time() == snapshots[0].time())
    throw ConfigError("spacetime norm needs strictly monotone snapshot times");
  for (std::size_t i = 2; i < snapshots.size(); ++i) {
    const double a = snapshots[i - 1].time() - snapshots[i - 2].time();
    const double b = snapshots[i].time() - snapshots[i - 1].time();
    if (!(a * b > 0.0)) throw ConfigError("spacetime norm needs strictly monotone snapshot times");
  }

  std::vector<double> norms;
  norms.reserve(snapshots.size());
  for (const auto& s : snapshots) norms.push_back(compute_norm(s, NormKind::lp(q_space)));
  if (sup) return *std::max_element(norms.begin(), norms.end());

  double acc = 0.0;
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    const double dt = std::abs(snapshots[i].time() - snapshots[i - 1].time());
    acc += 0.5 * dt * (std::pow(norms[i], p_time) + std::pow(norms[i - 1], p_time));
  }
  return std::pow(acc, 1.0 / p_time);
}

}  // namespace cslab
