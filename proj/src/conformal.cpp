#include "cslab/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cslab/error.hpp"
#include "cslab/spectral.hpp"

namespace cslab {

Field dephase(const Field& u, double t, KineticSign sign) {
  if (!(t > 0.0)) throw ConfigError("dephase needs t > 0");
  const double kappa = sign == KineticSign::plus_laplacian ? 1.0 : -1.0;
  Field out = u;
  for_each_point(u.grid(), [&](std::size_t i, double x, double y, double z) {
    out[i] *= std::polar(1.0, -kappa * (x * x + y * y + z * z) / (4.0 * t));
  });
  return out;
}

Field conformal_at_unit_time(const Field& u1) { return dephase(u1, 1.0, KineticSign::minus_laplacian); }

namespace {

struct AxisStencil {
  std::vector<int> lo;
  std::vector<double> frac;
  std::vector<bool> inside;
};

// Cell-centred sample i sits at -L + (i + 1/2) h, so a point y has
// fractional index (y + L)/h - 1/2.
AxisStencil axis_stencil(const Grid& g, double scale) {
  const int n = g.points_per_axis;
  AxisStencil s{std::vector<int>(n), std::vector<double>(n), std::vector<bool>(n)};
  for (int i = 0; i < n; ++i) {
    const double y = g.coordinate(i) * scale;
    const double q = (y + g.box_half_width) / g.spacing - 0.5;
    const double fl = std::floor(q);
    s.lo[i] = static_cast<int>(fl);
    s.frac[i] = q - fl;
    s.inside[i] = q >= 0.0 && q <= n - 1;
    if (s.inside[i] && s.lo[i] == n - 1) {  // right end point exactly
      s.lo[i] = n - 2;
      s.frac[i] = 1.0;
    }
  }
  return s;
}

// Mass of u outside the cube [-a, a]^3.
double mass_outside_cube(const Field& u, double a) {
  double acc = 0.0;
  for_each_point(u.grid(), [&](std::size_t i, double x, double y, double z) {
    if (std::abs(x) > a || std::abs(y) > a || std::abs(z) > a) acc += std::norm(u[i]);
  });
  return acc * u.grid().cell_volume();
}

}  // namespace

Field resample(const Field& u, double scale) {
  const Grid& g = u.grid();
  const int n = g.points_per_axis;
  const AxisStencil s = axis_stencil(g, scale);
  Field out(g, u.time());
  auto at = [&](int i, int j, int k) { return u[(static_cast<std::size_t>(i) * n + j) * n + k]; };
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++flat) {
        if (!(s.inside[i] && s.inside[j] && s.inside[k])) continue;
        const int a = s.lo[i], b = s.lo[j], c = s.lo[k];
        const double fx = s.frac[i], fy = s.frac[j], fz = s.frac[k];
        const Complex c00 = at(a, b, c) * (1 - fz) + at(a, b, c + 1) * fz;
        const Complex c01 = at(a, b + 1, c) * (1 - fz) + at(a, b + 1, c + 1) * fz;
        const Complex c10 = at(a + 1, b, c) * (1 - fz) + at(a + 1, b, c + 1) * fz;
        const Complex c11 = at(a + 1, b + 1, c) * (1 - fz) + at(a + 1, b + 1, c + 1) * fz;
        out[flat] = (c00 * (1 - fy) + c01 * fy) * (1 - fx) + (c10 * (1 - fy) + c11 * fy) * fx;
      }
  return out;
}

ConformalImage general_conformal(const Field& u_at, double t, KineticSign sign) {
  if (!(t > 0.0)) throw ConfigError("general_conformal needs t > 0");
  ConformalImage img;
  Field w = resample(u_at, 1.0 / t);
  const double amp = std::pow(t, -1.5);
  for (Complex& z : w.values()) z *= amp;
  img.field = dephase(w, t, sign);
  img.field.set_time(t);
  const double in = mass(u_at);
  const double out = mass(img.field);
  img.norm_defect = in > 0.0 ? std::abs(std::sqrt(out) - std::sqrt(in)) / std::sqrt(in) : 0.0;
  const double L = u_at.grid().box_half_width;
  img.lost_mass_fraction = (t > 1.0 && in > 0.0) ? mass_outside_cube(u_at, L / t) / in : 0.0;
  img.flagged = img.lost_mass_fraction > 1e-4;
  return img;
}

SignVariant natural_variant(KineticSign sign) {
  return sign == KineticSign::minus_laplacian ? SignVariant::minus_2it : SignVariant::plus_2it;
}

PseudoConformalReading pseudo_conformal_quantity(const Field& u, double t, const EquationSpec& spec,
                                                 SignVariant variant, const RealField* potential,
                                                 double nonlinear_coefficient) {
  PseudoConformalReading r;
  r.time = t;
  const Grid& g = u.grid();
  const auto grad = gradient(u);
  const Complex c(0.0, variant == SignVariant::minus_2it ? -2.0 * t : 2.0 * t);
  double dil = 0.0;
  for_each_point(g, [&](std::size_t i, double x, double y, double z) {
    dil += std::norm(x * u[i] + c * grad[0][i]) + std::norm(y * u[i] + c * grad[1][i]) +
           std::norm(z * u[i] + c * grad[2][i]);
  });
  r.dilation_term = dil * g.cell_volume();

  std::optional<RealField> owned;
  if (spec.potential && !potential) {
    owned = sample_potential(g, *spec.potential);
    potential = &*owned;
  }
  if (spec.potential) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += potential->values[i] * std::norm(u[i]);
    r.potential_term = 4.0 * t * t * acc * g.cell_volume();
  }
  if (!spec.is_linear()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::pow(std::norm(u[i]), 5.0 / 3.0);
    r.nonlinear_term = spec.sigma() * nonlinear_coefficient * spec.coupling * t * t * acc * g.cell_volume();
  }
  r.total = r.dilation_term + r.potential_term + r.nonlinear_term;
  return r;
}

RadiationProfile extract_radiation_profile(const Field& f, const EquationSpec& spec,
                                           const std::vector<double>& delta_ladder,
                                           const RadiationOptions& options, RadiationMethod method) {
  spec.validate();
  if (delta_ladder.empty()) throw ConfigError("delta ladder must not be empty");
  for (std::size_t i = 0; i < delta_ladder.size(); ++i) {
    if (!(delta_ladder[i] > 0.0 && delta_ladder[i] <= 1.0)) throw ConfigError("delta ladder entries must lie in (0, 1]");
    if (i && !(delta_ladder[i] < delta_ladder[i - 1])) throw ConfigError("delta ladder must be decreasing");
  }
  const bool free = spec.is_linear() && !spec.potential;
  if (method == RadiationMethod::exact_free && !free)
    throw ConfigError("exact_free radiation needs a free equation");

  std::optional<RealField> owned;
  const RealField* v = options.potential;
  if (spec.potential && !v) {
    owned = sample_potential(f.grid(), *spec.potential);
    v = &*owned;
  }

  RadiationProfile prof;
  prof.method = method;
  prof.delta_min = delta_ladder.back();

  EvolveOptions eo;
  eo.energy_stride = 0;
  eo.potential = v;
  if (free) {
    prof.u1 = free_propagate(f, 1.0, spec.kinetic_sign);
  } else {
    const Trajectory fwd = evolve(f, 0.0, 1.0, options.dt, spec, {1.0}, eo);
    prof.u1 = fwd.snapshots.back();
    if (fwd.aborted) {
      prof.aborted = true;
      prof.note = fwd.note;
      prof.g = Field(f.grid());
      return prof;
    }
  }
  prof.u1.set_time(1.0);
  prof.u1_tilde = dephase(prof.u1, 1.0, spec.kinetic_sign);

  std::vector<double> times;
  for (double d : delta_ladder) times.insert(times.end(), {d, d / 2});
  std::sort(times.begin(), times.end(), std::greater<>());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const EquationSpec conj = spec.conjugated();
  std::map<double, Field> at;
  Field cur = prof.u1_tilde;
  double t_prev = 1.0;
  for (double tau : times) {
    if (method == RadiationMethod::exact_free) {
      cur = free_propagate(prof.u1_tilde, tau - 1.0, conj.kinetic_sign);
    } else if (tau != t_prev) {
      const Trajectory seg = evolve(cur, t_prev, tau, options.dt, conj, {tau}, eo);
      cur = seg.snapshots.back();
      if (seg.aborted) {
        prof.aborted = true;
        prof.note = seg.note;
        break;
      }
    }
    cur.set_time(tau);
    at[tau] = cur;
    t_prev = tau;
  }

  for (double d : delta_ladder) {
    if (!at.count(d) || !at.count(d / 2)) break;
    prof.cauchy_gaps.emplace_back(d, l2_distance(at[d], at[d / 2]));
  }
  for (std::size_t i = 1; i < prof.cauchy_gaps.size(); ++i)
    if (!(prof.cauchy_gaps[i].second < prof.cauchy_gaps[i - 1].second)) prof.cauchy = false;
  if (!prof.cauchy) prof.note += (prof.note.empty() ? "" : "; ") + std::string("cauchy gaps not decreasing");
  prof.g = at.count(prof.delta_min) ? at[prof.delta_min] : cur;
  return prof;
}

GapReading asymptotic_l2_gap(const Field& u_t, double t, const Field& g, KineticSign sign) {
  if (!(t > 0.0)) throw ConfigError("asymptotic gap needs t > 0");
  if (!(u_t.grid() == g.grid())) throw ConfigError("asymptotic gap needs fields on one grid");
  GapReading r;
  Field w = resample(g, 1.0 / t);
  const double amp = std::pow(t, -1.5);
  const double kappa = sign == KineticSign::plus_laplacian ? 1.0 : -1.0;
  for_each_point(g.grid(), [&](std::size_t i, double x, double y, double z) {
    w[i] *= amp * std::polar(1.0, kappa * (x * x + y * y + z * z) / (4.0 * t));
  });
  r.gap = l2_distance(u_t, w);
  const double gm = mass(g);
  r.lost_mass_fraction = (t > 1.0 && gm > 0.0) ? mass_outside_cube(g, g.grid().box_half_width / t) / gm : 0.0;
  r.flagged = r.lost_mass_fraction > 1e-4;
  return r;
}

RadiationInequality radiation_inequality_check(const Field& f, const Field& g, const EquationSpec& spec,
                                               const Field* u1, const RealField* potential, double slack) {
  RadiationInequality r;
  const double h = compute_norm(f, NormKind::hdot(0.5));
  const double w = compute_norm(g, NormKind::weighted(1));
  r.lhs = h * h;
  r.rhs = 0.5 * w * w;
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  r.satisfied = !spec.is_linear() || r.lhs <= r.rhs * (1.0 + slack);
  if (u1) {
    const Grid& gr = u1->grid();
    std::optional<RealField> owned;
    if (spec.potential && !potential) {
      owned = sample_potential(gr, *spec.potential);
      potential = &*owned;
    }
    const double k = compute_norm(*u1, NormKind::hdot(1.0));
    double lhs = 4.0 * k * k;
    if (spec.potential) {
      double acc = 0.0;
      for (std::size_t i = 0; i < u1->size(); ++i) acc += potential->values[i] * std::norm((*u1)[i]);
      lhs += 4.0 * acc * gr.cell_volume();
    }
    if (!spec.is_linear()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < u1->size(); ++i) acc += std::pow(std::norm((*u1)[i]), 5.0 / 3.0);
      lhs += spec.sigma() * pseudo_conformal_coefficient * spec.coupling * acc * gr.cell_volume();
    }
    const double x2 = compute_norm(g, NormKind::weighted(2));
    r.spect_lhs = lhs;
    r.spect_rhs = x2 * x2;
    r.spect_residual = x2 > 0.0 ? std::abs(lhs - x2 * x2) / (x2 * x2) : 0.0;
  }
  return r;
}

}  // namespace cslab
