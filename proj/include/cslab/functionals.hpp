#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cslab/evolution.hpp"
#include "cslab/field.hpp"
#include "cslab/test_function.hpp"

namespace cslab {

/// Grid weights W with sum_x W(x) d(x) h^3 = int_{|x|<L} w(|x|) d(x) dx for
/// every trigonometric polynomial d on the grid. The weights come from the
/// exact transform of the radial w, so jumps in w or its derivatives cost
/// no accuracy as long as d is resolved.
class RadialQuadrature {
 public:
  RadialQuadrature() = default;
  /// `kinks` lists radii where w is not smooth.
  RadialQuadrature(const Grid& grid, const std::function<double(double)>& w, std::vector<double> kinks);
  /// Pointwise midpoint weights for a non-radial w.
  static RadialQuadrature pointwise(const Grid& grid, const std::function<double(double, double, double)>& w);
  double integrate(std::span<const double> density) const;
  bool empty() const { return weight_.empty(); }
  const std::vector<double>& weights() const { return weight_; }

 private:
  double cell_volume_ = 0.0;
  std::vector<double> weight_;
};

struct SmoothingProfile {
  std::vector<double> radii;
  /// S(R) = (1/R) int_0^T int_{|x|<R} |grad u|^2.
  std::vector<double> values;
  /// Radii beyond 0.8 L; their values are computed but not trusted.
  std::vector<bool> flagged;
  double horizon = 0.0;
  double sup_value = 0.0;  // max over unflagged radii
  double hdot_half_sq = 0.0;
  double ratio_sup = 0.0;
  double radius_cap = 0.0;
};

/// Streams snapshots into S(R) with the trapezoid rule in time. In space each
/// ball is integrated with RadialQuadrature weights for its indicator.
class SmoothingAccumulator {
 public:
  SmoothingAccumulator(const Grid& grid, std::vector<double> radii);
  void add(const Field& u);
  /// R * S(R) at the last added time.
  const std::vector<double>& cumulative() const { return integral_; }
  SmoothingProfile finish(const Field& f) const;
  std::size_t samples() const { return samples_; }

 private:
  Grid grid_;
  std::vector<double> radii_;
  std::vector<RadialQuadrature> balls_;
  std::vector<double> integral_;
  std::vector<double> last_;
  double last_time_ = 0.0;
  double first_time_ = 0.0;
  std::size_t samples_ = 0;
};

SmoothingProfile smoothing_profile(const Trajectory& traj, const std::vector<double>& radii, const Field& f);

/// Pointwise psi''|d_r u|^2 + (psi'/r)|grad_tau u|^2 with psi = phi_R.
RealField hessian_quadratic_form(const Field& u, const TestFunction& tf, double R_scale);

/// Im int conj(u) grad u . grad phi_R.
double flux_functional(const Field& u, const TestFunction& tf, double R_scale);

struct MorawetzReading {
  double lhs_hessian = 0.0;
  double lhs_bilap = 0.0;     // -(1/4) int int |u|^2 bilap psi
  double lhs_potential = 0.0; // potential term, or the nonlinear term for NLS
  double rhs_boundary_T = 0.0;
  double rhs_boundary_0 = 0.0;
  double residual = 0.0;
  double lhs() const { return lhs_hessian + lhs_bilap + lhs_potential; }
  double rhs() const { return rhs_boundary_T + rhs_boundary_0; }
  double relative_residual() const;
};

/// Absolute truncation integrals that vanish as R grows.
struct TruncationReading {
  double bilap = 0.0;      // int int |u|^2 |bilap phi_R|
  double potential = 0.0;  // int int |u|^2 W |x|^{-3} |phi_R'| (outside the clamp radius)
  double nonlinear = 0.0;  // int int |u|^{10/3} |Delta phi_R|
};

/// The multiplier psi = phi_R sampled on a grid.
///
/// The bilaplacian term is evaluated as int Delta|u|^2 Delta psi, so the jump
/// of bilap psi never enters a quadrature. The potential term uses the
/// spectral gradient of the sampled potential, which is the potential the
/// split-step solver actually applies.
struct MultiplierWeights {
  RadialQuadrature psi_prime_over_r;
  RadialQuadrature psi_prime;
  RadialQuadrature psi_second;
  RadialQuadrature laplacian;
  /// -(1/2) d_r V psi' pointwise; empty for W = 0.
  std::vector<double> potential;
  /// Pointwise absolute weights for the truncation integrals.
  std::vector<double> abs_bilaplacian;
  std::vector<double> abs_laplacian;
  std::vector<double> abs_potential;  // W |x|^{-3} |psi'| outside the clamp radius

  MultiplierWeights(const Grid& grid, const TestFunction& tf, double R_scale,
                    const std::optional<AngularPotential>& pot);
};

/// Accumulates both sides of the multiplier identity along a run.
class MorawetzAccumulator {
 public:
  MorawetzAccumulator(const Grid& grid, const TestFunction& tf, double R_scale, const EquationSpec& spec);
  void add(const Field& u);
  MorawetzReading finish() const;
  TruncationReading truncation() const { return trunc_; }
  std::size_t samples() const { return samples_; }

 private:
  struct Sample {
    double hessian, bilap, potential, trunc_bilap, trunc_potential, trunc_nonlinear;
  };
  Sample evaluate(const Field& u, double& flux) const;

  Grid grid_;
  EquationSpec spec_;
  MultiplierWeights w_;
  Sample last_{};
  double last_time_ = 0.0;
  double flux_0_ = 0.0;
  double flux_T_ = 0.0;
  MorawetzReading acc_;
  TruncationReading trunc_;
  std::size_t samples_ = 0;
};

MorawetzReading morawetz_residual(const Trajectory& traj, const TestFunction& tf, double R_scale,
                                  const EquationSpec& spec);

/// (1/t) int |x| |u|^2.
double uniqueness_functional(const Field& u, double t);

/// Streams int int_{|x|<1} |u|^2 V with the clamped potential V = W/|x|^2.
class WeightedMassAccumulator {
 public:
  WeightedMassAccumulator(const Grid& grid, const AngularPotential& pot);
  void add(const Field& u);
  double value() const { return value_; }

 private:
  std::vector<double> weight_;
  double cell_volume_;
  double last_ = 0.0;
  double last_time_ = 0.0;
  double value_ = 0.0;
  std::size_t samples_ = 0;
};

double weighted_mass_near_origin(const Trajectory& traj, const AngularPotential& pot);

struct StrichartzReading {
  double l_mixed = 0.0;  // L^2_t L^6_x
  double l_diag = 0.0;   // L^{10/3}_{t,x}
};

/// Streaming version of strichartz_monitor.
class StrichartzAccumulator {
 public:
  void add(const Field& u);
  StrichartzReading value() const;

 private:
  double mixed_ = 0.0, diag_ = 0.0;
  double last_mixed_ = 0.0, last_diag_ = 0.0, last_time_ = 0.0;
  std::size_t samples_ = 0;
};

StrichartzReading strichartz_monitor(const Trajectory& traj);

}  // namespace cslab
