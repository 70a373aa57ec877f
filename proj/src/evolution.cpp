#include "cslab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cslab/error.hpp"
#include "cslab/fft.hpp"

namespace cslab {

std::string to_string(KineticSign k) {
  return k == KineticSign::plus_laplacian ? "plus_laplacian" : "minus_laplacian";
}

std::string to_string(NonlinearitySign s) {
  switch (s) {
    case NonlinearitySign::none: return "none";
    case NonlinearitySign::focusing: return "focusing";
    case NonlinearitySign::defocusing: return "defocusing";
  }
  return "none";
}

AngularPotential AngularPotential::constant(double c, double eps) {
  return {Kind::constant, c, 0.0, eps};
}

AngularPotential AngularPotential::axial(double a, double b, double eps) {
  return {Kind::axial, a, b, eps};
}

double AngularPotential::angular(double x, double y, double z) const {
  if (kind == Kind::constant) return a;
  const double r2 = x * x + y * y + z * z;
  if (r2 == 0.0) return a + b / 3.0;
  return a + b * x * x / r2;
}

double AngularPotential::effective_radius(double spacing) const {
  return regularization_radius > 0.0 ? regularization_radius : 2.0 * spacing;
}

EquationSpec EquationSpec::free(KineticSign k) {
  EquationSpec s;
  s.kinetic_sign = k;
  return s;
}

double EquationSpec::sigma() const {
  switch (nonlinearity) {
    case NonlinearitySign::defocusing: return 1.0;
    case NonlinearitySign::focusing: return -1.0;
    default: return 0.0;
  }
}

EquationSpec EquationSpec::conjugated() const {
  EquationSpec s = *this;
  s.kinetic_sign = kinetic_sign == KineticSign::plus_laplacian ? KineticSign::minus_laplacian
                                                               : KineticSign::plus_laplacian;
  return s;
}

void EquationSpec::validate() const {
  if (!(coupling >= 0.0)) throw ConfigError("equation.lambda must be >= 0");
  if ((coupling == 0.0) != (nonlinearity == NonlinearitySign::none))
    throw ConfigError("equation.lambda must be 0 exactly when the nonlinearity is none");
  if (potential) {
    if (!(potential->a >= 0.0) || !(potential->b >= 0.0))
      throw ConfigError("equation.potential coefficients must be non-negative");
    if (potential->regularization_radius < 0.0)
      throw ConfigError("equation.potential.epsilon must be positive");
  }
}

RealField sample_potential(const Grid& grid, const AngularPotential& pot) {
  const double eps = pot.effective_radius(grid.spacing);
  if (eps < grid.spacing * (1.0 - 1e-12))
    throw ConfigError("potential regularization radius must be at least one grid spacing");
  const double eps2 = eps * eps;
  RealField v{grid, std::vector<double>(grid.size())};
  for_each_point(grid, [&](std::size_t i, double x, double y, double z) {
    const double r2 = x * x + y * y + z * z;
    v.values[i] = pot.angular(x, y, z) / std::max(r2, eps2);
  });
  return v;
}

namespace {

std::vector<Complex> kinetic_multiplier(const Grid& grid, double dt, double kappa) {
  const int n = grid.points_per_axis;
  std::vector<Complex> m(grid.size());
  for_each_frequency(grid, [&](std::size_t i, double kx, double ky, double kz) {
    const double k2 = kx * kx + ky * ky + kz * kz;
    m[i] = std::polar(1.0, -kappa * k2 * dt);
  });
  (void)n;
  return m;
}

// z *= w written out: std::complex multiplication carries NaN recovery
// branches that dominate the pointwise loops.
inline void rotate(Complex& z, double c, double s) {
  const double re = z.real() * c - z.imag() * s;
  const double im = z.real() * s + z.imag() * c;
  z = Complex(re, im);
}

void apply_multiplier(Field& u, const std::vector<Complex>& m) {
  const Fft3 fft(u.grid().points_per_axis);
  fft.forward(u.values());
  Complex* d = u.data();
  for (std::size_t i = 0; i < m.size(); ++i) rotate(d[i], m[i].real(), m[i].imag());
  fft.inverse(u.values());
}

}  // namespace

Field free_propagate(const Field& field, double dt, KineticSign sign) {
  if (field.domain() != Domain::space) throw ConfigError("free_propagate expects a space-domain field");
  Field out = field;
  const double kappa = sign == KineticSign::plus_laplacian ? 1.0 : -1.0;
  apply_multiplier(out, kinetic_multiplier(field.grid(), dt, kappa));
  out.set_time(field.time() + dt);
  return out;
}

Stepper::Stepper(const Grid& grid, double dt, const EquationSpec& spec, const RealField* potential)
    : grid_(grid), dt_(dt), spec_(spec) {
  spec.validate();
  if (spec.potential.has_value() != (potential != nullptr))
    throw ConfigError("a sampled potential is required exactly when the equation has one");
  if (potential && !(potential->grid == grid)) throw ConfigError("potential sampled on a different grid");
  kinetic_ = kinetic_multiplier(grid, dt, spec.kappa());
  if (potential) {
    potential_ = potential->values;
    if (spec.is_linear()) {
      potential_phase_.resize(potential_.size());
      for (std::size_t i = 0; i < potential_.size(); ++i)
        potential_phase_[i] = std::polar(1.0, -spec.kappa() * potential_[i] * dt / 2.0);
    }
  }
}

void Stepper::phase(Field& u) const {
  Complex* d = u.data();
  const std::size_t n = u.size();
  if (!spec_.is_linear()) {
    // |u| is constant along this substep, so the rotation is exact.
    const double c = -spec_.kappa() * dt_ / 2.0;
    const double g = spec_.sigma() * spec_.coupling;
    const bool with_v = !potential_.empty();
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::norm(d[i]);
      double w = g * std::cbrt(rho * rho);  // |u|^{4/3}
      if (with_v) w += potential_[i];
      const double a = c * w;
      rotate(d[i], std::cos(a), std::sin(a));
    }
  } else if (!potential_phase_.empty()) {
    for (std::size_t i = 0; i < n; ++i) rotate(d[i], potential_phase_[i].real(), potential_phase_[i].imag());
  }
}

void Stepper::step(Field& u) {
  phase(u);
  apply_multiplier(u, kinetic_);
  phase(u);
  u.set_time(u.time() + dt_);
}

Field strang_step(const Field& field, double dt, const EquationSpec& spec, const RealField* potential) {
  Stepper s(field.grid(), dt, spec, potential);
  Field out = field;
  s.step(out);
  return out;
}

double mass(const Field& u) {
  double acc = 0.0;
  for (const Complex& z : u.values()) acc += std::norm(z);
  return acc * u.grid().cell_volume();
}

double energy(const Field& u, const EquationSpec& spec, const RealField* potential) {
  const Grid& g = u.grid();
  Field hat = u;
  const Fft3 fft(g.points_per_axis);
  fft.forward(hat.values());
  double kinetic = 0.0;
  for_each_frequency(g, [&](std::size_t i, double kx, double ky, double kz) {
    kinetic += (kx * kx + ky * ky + kz * kz) * std::norm(hat[i]);
  });
  // Parseval for the unnormalized transform: sum |u|^2 = sum |F|^2 / N^3.
  kinetic *= g.cell_volume() / static_cast<double>(g.size());

  double pot = 0.0, nonlin = 0.0;
  const double p = 2.0 + nonlinear_power;  // 10/3
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double rho = std::norm(u[i]);
    if (potential) pot += potential->values[i] * rho;
    if (!spec.is_linear()) nonlin += std::pow(rho, p / 2.0);
  }
  pot *= g.cell_volume();
  nonlin *= g.cell_volume() * spec.sigma() * spec.coupling * 3.0 / 5.0;
  return kinetic + pot + nonlin;
}

Trajectory evolve(const Field& f, double t0, double t1, double dt, const EquationSpec& spec,
                  const std::vector<double>& snapshot_times, const EvolveOptions& options,
                  const StepObserver& observer) {
  spec.validate();
  if (!(dt > 0.0)) throw ConfigError("numerics.dt must be positive");
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  const double span = t1 - t0;
  const std::size_t steps =
      span == 0.0 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::abs(span) / dt)));
  const double h = steps ? span / static_cast<double>(steps) : 0.0;

  // Requested snapshot times mapped to step indices, in the direction of travel.
  std::vector<std::size_t> marks;
  for (double ts : snapshot_times) {
    const double tol = 1e-9 * std::max(1.0, std::abs(hi));
    if (ts < lo - tol || ts > hi + tol) throw ConfigError("snapshot time outside the evolution interval");
    marks.push_back(steps ? static_cast<std::size_t>(std::llround((ts - t0) / h)) : 0);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  std::optional<RealField> owned;
  const RealField* v = options.potential;
  if (spec.potential && !v) {
    owned = sample_potential(f.grid(), *spec.potential);
    v = &*owned;
  }
  if (!spec.potential) v = nullptr;

  Trajectory traj;
  traj.spec = spec;
  traj.dt = h;
  Field u = f;
  u.set_time(t0);

  auto record = [&](std::size_t k) {
    DiagnosticSample s;
    s.time = u.time();
    s.mass = mass(u);
    s.energy = (options.energy_stride && k % options.energy_stride == 0)
                   ? energy(u, spec, v)
                   : std::numeric_limits<double>::quiet_NaN();
    traj.diagnostics.push_back(s);
    return std::isfinite(s.mass);
  };

  std::size_t next = 0;
  record(0);
  if (observer) observer(u);
  if (next < marks.size() && marks[next] == 0) traj.snapshots.push_back(u), ++next;
  if (steps == 0) return traj;

  Stepper stepper(f.grid(), h, spec, v);
  Field last_valid = u;
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(u);
    u.set_time(t0 + h * static_cast<double>(k));  // avoid accumulated rounding in t
    if (!record(k)) {
      traj.aborted = true;
      traj.note = "non-finite values at t = " + std::to_string(u.time()) + "; run aborted";
      traj.snapshots.push_back(last_valid);
      break;
    }
    traj.steps = k;
    if (observer) observer(u);
    if (next < marks.size() && marks[next] == k) traj.snapshots.push_back(u), ++next;
    last_valid = u;
  }
  return traj;
}

}  // namespace cslab
