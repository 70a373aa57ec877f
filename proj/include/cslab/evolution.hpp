#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cslab/field.hpp"

namespace cslab {

/// minus_laplacian evolves i u_t = Delta u - V u - ..., plus_laplacian the
/// sign-flipped equation i u_t = -Delta u + V u + ...; the conformal map
/// exchanges the two.
enum class KineticSign { minus_laplacian, plus_laplacian };
enum class NonlinearitySign { none, focusing, defocusing };

std::string to_string(KineticSign k);
std::string to_string(NonlinearitySign s);

/// W(x/|x|) / |x|^2 with W = c (constant) or W = a + b (x1/|x|)^2 (axial).
struct AngularPotential {
  enum class Kind { constant, axial };
  Kind kind = Kind::constant;
  double a = 0.0;  // the constant c for Kind::constant
  double b = 0.0;
  /// Clamp radius; 0 selects the default of two grid spacings.
  double regularization_radius = 0.0;

  static AngularPotential constant(double c, double eps = 0.0);
  static AngularPotential axial(double a, double b, double eps = 0.0);
  /// W at the direction of (x, y, z); the origin maps to the mean direction value.
  double angular(double x, double y, double z) const;
  double sup() const { return a + b; }
  /// Regularization radius actually used on a grid with the given spacing.
  double effective_radius(double spacing) const;
};

struct EquationSpec {
  KineticSign kinetic_sign = KineticSign::minus_laplacian;
  std::optional<AngularPotential> potential;
  NonlinearitySign nonlinearity = NonlinearitySign::none;
  double coupling = 0.0;

  static EquationSpec free(KineticSign k = KineticSign::plus_laplacian);
  /// +1 for plus_laplacian, -1 for minus_laplacian.
  double kappa() const { return kinetic_sign == KineticSign::plus_laplacian ? 1.0 : -1.0; }
  /// +1 defocusing, -1 focusing, 0 linear.
  double sigma() const;
  bool is_linear() const { return nonlinearity == NonlinearitySign::none; }
  /// Same equation with the kinetic sign flipped (the conformally conjugated flow).
  EquationSpec conjugated() const;
  /// Throws ConfigError on lambda/nonlinearity mismatch or negative W.
  void validate() const;
};

/// Exponent of |u| in the nonlinearity, 4/n with n = 3.
inline constexpr double nonlinear_power = 4.0 / 3.0;

/// V(x) = W(x/|x|) / max(|x|^2, eps^2).
RealField sample_potential(const Grid& grid, const AngularPotential& pot);

/// Exact kinetic flow over dt, multiplier e^{-i kappa |xi|^2 dt}.
Field free_propagate(const Field& field, double dt, KineticSign sign);

/// One Strang step: half phase, full kinetic step, half phase.
/// `potential` must be given exactly when spec.potential is set.
Field strang_step(const Field& field, double dt, const EquationSpec& spec, const RealField* potential);

/// int |u|^2.
double mass(const Field& u);
/// int |grad u|^2 + V |u|^2 + sigma (3 lambda / 5) |u|^{10/3}.
double energy(const Field& u, const EquationSpec& spec, const RealField* potential);

/// Reusable stepper holding the kinetic multiplier and potential phase.
class Stepper {
 public:
  Stepper(const Grid& grid, double dt, const EquationSpec& spec, const RealField* potential);
  /// Advances u in place by one step of the signed dt given at construction.
  void step(Field& u);
  double dt() const { return dt_; }

 private:
  void phase(Field& u) const;
  Grid grid_;
  double dt_;
  EquationSpec spec_;
  std::vector<Complex> kinetic_;
  std::vector<Complex> potential_phase_;
  std::vector<double> potential_;
};

struct DiagnosticSample {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;  // NaN where not evaluated
};

struct Trajectory {
  EquationSpec spec;
  std::vector<Field> snapshots;
  std::vector<DiagnosticSample> diagnostics;
  double dt = 0.0;             // signed step actually used
  std::size_t steps = 0;
  bool aborted = false;        // non-finite values appeared
  std::string note;
};

struct EvolveOptions {
  /// Energy every this many steps; 0 disables.
  std::size_t energy_stride = 1;
  /// Regularized potential; sampled from spec when null.
  const RealField* potential = nullptr;
};

/// Called with the state after every step (and once with the initial data).
using StepObserver = std::function<void(const Field&)>;

/// Strang evolution from t0 to t1 (t1 < t0 runs backwards). The step is
/// adjusted to divide the interval; snapshots are taken at the nearest step
/// and carry the actual time.
Trajectory evolve(const Field& f, double t0, double t1, double dt, const EquationSpec& spec,
                  const std::vector<double>& snapshot_times, const EvolveOptions& options = {},
                  const StepObserver& observer = {});

}  // namespace cslab
