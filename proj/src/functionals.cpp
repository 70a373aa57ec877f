#include "cslab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "cslab/error.hpp"
#include "cslab/fft.hpp"
#include "cslab/spectral.hpp"

namespace cslab {
namespace {

constexpr int subcell = 6;

// Samples fn at cell centers; cells crossed by one of the jump radii are
// replaced by the mean over a subcell^3 lattice.
std::vector<double> sample_weight(const Grid& grid, const std::function<double(double, double, double)>& fn,
                                  const std::vector<double>& jumps) {
  std::vector<double> out(grid.size());
  const double h = grid.spacing;
  const double reach = 0.5 * std::sqrt(3.0) * h;
  for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const bool straddles =
        std::any_of(jumps.begin(), jumps.end(), [&](double b) { return std::abs(r - b) < reach; });
    if (!straddles) {
      out[idx] = fn(x, y, z);
      return;
    }
    double acc = 0.0;
    for (int a = 0; a < subcell; ++a)
      for (int b = 0; b < subcell; ++b)
        for (int c = 0; c < subcell; ++c) {
          const double dx = ((a + 0.5) / subcell - 0.5) * h;
          const double dy = ((b + 0.5) / subcell - 0.5) * h;
          const double dz = ((c + 0.5) / subcell - 0.5) * h;
          acc += fn(x + dx, y + dy, z + dz);
        }
    out[idx] = acc / (subcell * subcell * subcell);
  });
  return out;
}

double trapezoid_weight(double t_prev, double t_now) { return 0.5 * std::abs(t_now - t_prev); }

}  // namespace

// ---------------------------------------------------------------- smoothing

SmoothingAccumulator::SmoothingAccumulator(const Grid& grid, std::vector<double> radii)
    : grid_(grid), radii_(std::move(radii)) {
  if (radii_.empty()) throw ConfigError("smoothing profile needs at least one radius");
  if (!std::is_sorted(radii_.begin(), radii_.end()) || radii_.front() <= 0.0)
    throw ConfigError("smoothing radii must be positive and increasing");
  for (double R : radii_)
    balls_.emplace_back(grid_, [R](double r) { return r < R ? 1.0 : 0.0; }, std::vector<double>{R});
  integral_.assign(radii_.size(), 0.0);
  last_.assign(radii_.size(), 0.0);
}

void SmoothingAccumulator::add(const Field& u) {
  if (!(u.grid() == grid_)) throw ConfigError("smoothing accumulator: grid mismatch");
  const auto grad = gradient(u);
  std::vector<double> dens(u.size());
  for (std::size_t i = 0; i < dens.size(); ++i)
    dens[i] = std::norm(grad[0][i]) + std::norm(grad[1][i]) + std::norm(grad[2][i]);
  std::vector<double> now(radii_.size());
  for (std::size_t k = 0; k < radii_.size(); ++k) now[k] = balls_[k].integrate(dens);
  if (samples_ == 0) {
    first_time_ = u.time();
  } else {
    const double w = trapezoid_weight(last_time_, u.time());
    for (std::size_t k = 0; k < radii_.size(); ++k) integral_[k] += w * (now[k] + last_[k]);
  }
  last_ = std::move(now);
  last_time_ = u.time();
  ++samples_;
}

SmoothingProfile SmoothingAccumulator::finish(const Field& f) const {
  SmoothingProfile p;
  p.radii = radii_;
  p.horizon = std::abs(last_time_ - first_time_);
  p.radius_cap = 0.8 * grid_.box_half_width;
  p.hdot_half_sq = std::pow(compute_norm(f, NormKind::hdot(0.5)), 2);
  for (std::size_t k = 0; k < radii_.size(); ++k) {
    p.values.push_back(integral_[k] / radii_[k]);
    const bool flag = radii_[k] > p.radius_cap;
    p.flagged.push_back(flag);
    if (!flag) p.sup_value = std::max(p.sup_value, p.values.back());
  }
  p.ratio_sup = p.hdot_half_sq > 0.0 ? p.sup_value / p.hdot_half_sq : 0.0;
  return p;
}

SmoothingProfile smoothing_profile(const Trajectory& traj, const std::vector<double>& radii, const Field& f) {
  if (traj.snapshots.empty()) throw ConfigError("smoothing profile of an empty trajectory");
  SmoothingAccumulator acc(traj.snapshots.front().grid(), radii);
  for (const auto& s : traj.snapshots) acc.add(s);
  return acc.finish(f);
}

// ------------------------------------------------------------ hessian, flux

RealField hessian_quadratic_form(const Field& u, const TestFunction& tf, double R_scale) {
  const auto split = gradient_split(u);
  RealField out{u.grid(), std::vector<double>(u.size())};
  for_each_point(u.grid(), [&](std::size_t idx, double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const auto d = rescale(tf, R_scale, r);
    const double tangential = r > 0.0 ? d.phi_prime / r : d.phi_second;
    out.values[idx] = d.phi_second * split.radial_sq[idx] + tangential * split.tangential_sq[idx];
  });
  return out;
}

double flux_functional(const Field& u, const TestFunction& tf, double R_scale) {
  const auto split = gradient_split(u);
  double acc = 0.0;
  for_each_point(u.grid(), [&](std::size_t idx, double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const double psi_prime = rescale(tf, R_scale, r).phi_prime;
    acc += psi_prime * (std::conj(u[idx]) * split.radial_derivative[idx]).imag();
  });
  return acc * u.grid().cell_volume();
}

// ---------------------------------------------------------------- Morawetz

double MorawetzReading::relative_residual() const {
  const double scale = std::abs(rhs());
  return scale > 0.0 ? residual / scale : std::numeric_limits<double>::infinity();
}

RadialQuadrature::RadialQuadrature(const Grid& grid, const std::function<double(double)>& w,
                                   std::vector<double> kinks)
    : cell_volume_(grid.cell_volume()) {
  const int n = grid.points_per_axis;
  const double L = grid.box_half_width;
  const double k_unit = std::numbers::pi / L;

  // Gauss-Legendre nodes on [0, L], split at the kinks and into pieces short
  // against the shortest wavelength on the lattice.
  std::vector<double> cuts{0.0, L};
  for (double b : kinks)
    if (b > 0.0 && b < L) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double piece = 4.0 / (k_unit * (n / 2) * std::sqrt(3.0));  // about 2/3 of the shortest period
  using Rule = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> node, weight;
  for (std::size_t c = 1; c < cuts.size(); ++c) {
    const double a = cuts[c - 1], b = cuts[c];
    if (b <= a) continue;
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / piece)));
    for (int p = 0; p < m; ++p) {
      const double lo = a + (b - a) * p / m, hi = a + (b - a) * (p + 1) / m;
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      const auto& x = Rule::abscissa();
      const auto& wt = Rule::weights();
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double sgn[2] = {1.0, -1.0};
        for (int side = 0; side < (x[j] == 0.0 ? 1 : 2); ++side) {
          const double r = mid + sgn[side] * half * x[j];
          node.push_back(r);
          weight.push_back(half * wt[j] * 4.0 * std::numbers::pi * r * r * w(r));
        }
      }
    }
  }

  // Transform of w restricted to the ball, indexed by a^2 + b^2 + c^2.
  const int h = n / 2;
  std::vector<double> hat(3 * h * h + 1);
  for (std::size_t m = 0; m < hat.size(); ++m) {
    const double kk = k_unit * std::sqrt(static_cast<double>(m));
    double acc = 0.0;
    for (std::size_t j = 0; j < node.size(); ++j) {
      const double z = kk * node[j];
      acc += weight[j] * (z == 0.0 ? 1.0 : std::sin(z) / z);
    }
    hat[m] = acc;
  }

  // W(x) = (2L)^{-3} sum_k hat(|k|) e^{-i k.x}, a forward FFT after the
  // cell-centre phase shift.
  Field buf(grid);
  std::vector<int> sig(n);
  std::vector<Complex> shift(n);
  for (int j = 0; j < n; ++j) {
    sig[j] = j < h ? j : j - n;
    shift[j] = std::polar(1.0, -k_unit * sig[j] * grid.coordinate(0));
  }
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++flat)
        buf[flat] = hat[sig[i] * sig[i] + sig[j] * sig[j] + sig[l] * sig[l]] * shift[i] * shift[j] * shift[l];
  Fft3(n).forward(buf.values());
  const double norm = 1.0 / std::pow(2.0 * L, 3);
  weight_.resize(grid.size());
  for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = buf[i].real() * norm;
}

RadialQuadrature RadialQuadrature::pointwise(const Grid& grid,
                                             const std::function<double(double, double, double)>& w) {
  RadialQuadrature q;
  q.cell_volume_ = grid.cell_volume();
  q.weight_.resize(grid.size());
  for_each_point(grid, [&](std::size_t idx, double x, double y, double z) { q.weight_[idx] = w(x, y, z); });
  return q;
}

double RadialQuadrature::integrate(std::span<const double> density) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < weight_.size(); ++i) acc += weight_[i] * density[i];
  return acc * cell_volume_;
}

MultiplierWeights::MultiplierWeights(const Grid& grid, const TestFunction& tf, double R,
                                     const std::optional<AngularPotential>& pot) {
  std::vector<double> kinks;
  for (double b : tf.breakpoints()) kinks.push_back(b * R);
  const auto r_of = [](double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); };

  abs_laplacian.resize(grid.size());
  for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
    abs_laplacian[idx] = std::abs(rescale(tf, R, r_of(x, y, z)).laplacian);
  });
  psi_prime = RadialQuadrature(grid, [&](double r) { return rescale(tf, R, r).phi_prime; }, kinks);
  psi_prime_over_r = RadialQuadrature(
      grid,
      [&](double r) {
        const auto d = rescale(tf, R, r);
        return r > 0.0 ? d.phi_prime / r : d.phi_second;
      },
      kinks);
  psi_second = RadialQuadrature(grid, [&](double r) { return rescale(tf, R, r).phi_second; }, kinks);
  laplacian = RadialQuadrature(grid, [&](double r) { return rescale(tf, R, r).laplacian; }, kinks);
  abs_bilaplacian = sample_weight(
      grid, [&](double x, double y, double z) { return std::abs(rescale(tf, R, r_of(x, y, z)).bilaplacian); },
      kinks);

  if (pot && pot->sup() != 0.0) {
    const double eps = pot->effective_radius(grid.spacing);
    std::vector<double> pot_kinks = kinks;
    pot_kinks.push_back(eps);
    // -(1/2) grad V . grad psi with the spectral gradient of the sampled
    // potential, i.e. of the potential the solver actually applies.
    const RealField sampled = sample_potential(grid, *pot);
    Field vf(grid);
    for (std::size_t i = 0; i < vf.size(); ++i) vf[i] = sampled.values[i];
    const auto grad_v = gradient(vf);
    potential.resize(grid.size());
    for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
      const double r = r_of(x, y, z);
      const double dr_v = (x * grad_v[0][idx].real() + y * grad_v[1][idx].real() + z * grad_v[2][idx].real()) / r;
      potential[idx] = -0.5 * dr_v * rescale(tf, R, r).phi_prime;
    });
    abs_potential = sample_weight(
        grid,
        [&](double x, double y, double z) {
          const double r = r_of(x, y, z);
          if (r <= eps) return 0.0;
          return pot->angular(x, y, z) * std::abs(rescale(tf, R, r).phi_prime) / (r * r * r);
        },
        pot_kinks);
  }
}

MorawetzAccumulator::MorawetzAccumulator(const Grid& grid, const TestFunction& tf, double R_scale,
                                         const EquationSpec& spec)
    : grid_(grid), spec_(spec), w_(grid, tf, R_scale, spec.potential) {}

MorawetzAccumulator::Sample MorawetzAccumulator::evaluate(const Field& u, double& flux) const {
  if (!(u.grid() == grid_)) throw ConfigError("Morawetz accumulator: grid mismatch");
  const auto split = gradient_split(u);
  const Field lap = minus_laplacian(u);
  const std::size_t size = u.size();
  const bool has_pot = !w_.potential.empty();
  const bool nls = !spec_.is_linear();
  const double nls_coef = spec_.sigma() * spec_.coupling / 5.0;  // 1/(n+2)

  std::vector<double> rho(size), momentum(size), lap_density(size), nonlinear(nls ? size : 0);
  Sample s{};
  for (std::size_t i = 0; i < size; ++i) {
    rho[i] = std::norm(u[i]);
    const Complex c = std::conj(u[i]) * split.radial_derivative[i];
    momentum[i] = c.imag();
    // -(1/4) Delta|u|^2 with Delta|u|^2 = 2 Re(conj(u) Delta u) + 2 |grad u|^2
    lap_density[i] = -0.5 * (split.gradient_sq[i] - (std::conj(u[i]) * lap[i]).real());
    s.trunc_bilap += rho[i] * w_.abs_bilaplacian[i];
    if (has_pot) s.trunc_potential += rho[i] * w_.abs_potential[i];
    if (nls) {
      nonlinear[i] = rho[i] * std::cbrt(rho[i] * rho[i]);  // |u|^{10/3}
      s.trunc_nonlinear += nonlinear[i] * w_.abs_laplacian[i];
    }
  }
  const double dv = grid_.cell_volume();
  s.hessian = w_.psi_second.integrate(split.radial_sq) + w_.psi_prime_over_r.integrate(split.tangential_sq);
  s.bilap = w_.laplacian.integrate(lap_density);
  if (nls) s.potential += nls_coef * w_.laplacian.integrate(nonlinear);
  if (has_pot) {
    double acc = 0.0;
    for (std::size_t i = 0; i < size; ++i) acc += rho[i] * w_.potential[i];
    s.potential += acc * dv;
  }
  s.trunc_bilap *= dv;
  s.trunc_potential *= dv;
  s.trunc_nonlinear *= dv;
  flux = w_.psi_prime.integrate(momentum);
  return s;
}

void MorawetzAccumulator::add(const Field& u) {
  double flux = 0.0;
  const Sample now = evaluate(u, flux);
  if (samples_ == 0) {
    flux_0_ = flux;
  } else {
    const double w = trapezoid_weight(last_time_, u.time());
    acc_.lhs_hessian += w * (now.hessian + last_.hessian);
    acc_.lhs_bilap += w * (now.bilap + last_.bilap);
    acc_.lhs_potential += w * (now.potential + last_.potential);
    trunc_.bilap += w * (now.trunc_bilap + last_.trunc_bilap);
    trunc_.potential += w * (now.trunc_potential + last_.trunc_potential);
    trunc_.nonlinear += w * (now.trunc_nonlinear + last_.trunc_nonlinear);
  }
  flux_T_ = flux;
  last_ = now;
  last_time_ = u.time();
  ++samples_;
}

MorawetzReading MorawetzAccumulator::finish() const {
  MorawetzReading r = acc_;
  // d/dt Im int conj(u) d_r u psi' = -2 kappa (integrand) for the flow
  // i u_t = kappa(-Delta u + V u + sigma lambda |u|^{4/3} u).
  const double k = spec_.kappa();
  r.rhs_boundary_T = 0.5 * k * flux_T_;
  r.rhs_boundary_0 = -0.5 * k * flux_0_;
  r.residual = std::abs(r.lhs() - r.rhs());
  return r;
}

MorawetzReading morawetz_residual(const Trajectory& traj, const TestFunction& tf, double R_scale,
                                  const EquationSpec& spec) {
  if (traj.snapshots.empty()) throw ConfigError("Morawetz residual of an empty trajectory");
  MorawetzAccumulator acc(traj.snapshots.front().grid(), tf, R_scale, spec);
  for (const auto& s : traj.snapshots) acc.add(s);
  return acc.finish();
}

// --------------------------------------------------------- weighted masses

double uniqueness_functional(const Field& u, double t) {
  if (!(t > 0.0)) throw ConfigError("uniqueness functional needs t > 0");
  double acc = 0.0;
  for_each_point(u.grid(), [&](std::size_t idx, double x, double y, double z) {
    acc += std::sqrt(x * x + y * y + z * z) * std::norm(u[idx]);
  });
  return acc * u.grid().cell_volume() / t;
}

WeightedMassAccumulator::WeightedMassAccumulator(const Grid& grid, const AngularPotential& pot)
    : cell_volume_(grid.cell_volume()) {
  const RealField v = sample_potential(grid, pot);
  weight_.resize(grid.size());
  for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
    weight_[idx] = x * x + y * y + z * z < 1.0 ? v.values[idx] : 0.0;
  });
}

void WeightedMassAccumulator::add(const Field& u) {
  double now = 0.0;
  for (std::size_t i = 0; i < weight_.size(); ++i)
    if (weight_[i] != 0.0) now += weight_[i] * std::norm(u[i]);
  now *= cell_volume_;
  if (samples_ > 0) value_ += trapezoid_weight(last_time_, u.time()) * (now + last_);
  last_ = now;
  last_time_ = u.time();
  ++samples_;
}

double weighted_mass_near_origin(const Trajectory& traj, const AngularPotential& pot) {
  if (traj.snapshots.empty()) return 0.0;
  WeightedMassAccumulator acc(traj.snapshots.front().grid(), pot);
  for (const auto& s : traj.snapshots) acc.add(s);
  return acc.value();
}

// --------------------------------------------------------------- Strichartz

void StrichartzAccumulator::add(const Field& u) {
  const double l6 = compute_norm(u, NormKind::lp(6.0));
  const double mixed = l6 * l6;
  const double diag = std::pow(compute_norm(u, NormKind::lp(10.0 / 3.0)), 10.0 / 3.0);
  if (samples_ > 0) {
    const double w = trapezoid_weight(last_time_, u.time());
    mixed_ += w * (mixed + last_mixed_);
    diag_ += w * (diag + last_diag_);
  }
  last_mixed_ = mixed;
  last_diag_ = diag;
  last_time_ = u.time();
  ++samples_;
}

StrichartzReading StrichartzAccumulator::value() const {
  return {std::sqrt(mixed_), std::pow(diag_, 0.3)};
}

StrichartzReading strichartz_monitor(const Trajectory& traj) {
  if (traj.snapshots.size() < 2) throw ConfigError("Strichartz monitor needs at least 2 snapshots");
  std::span<const Field> s(traj.snapshots);
  return {spacetime_norm(s, 2.0, 6.0), spacetime_norm(s, 10.0 / 3.0, 10.0 / 3.0)};
}

}  // namespace cslab
