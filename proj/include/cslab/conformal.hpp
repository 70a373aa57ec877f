#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cslab/evolution.hpp"
#include "cslab/field.hpp"

namespace cslab {

/// e^{-i kappa |x|^2 / 4t} u. For the default minus_laplacian flow at t = 1 this
/// is the conformal image e^{i|x|^2/4} u(1).
Field dephase(const Field& u, double t, KineticSign sign = KineticSign::minus_laplacian);

/// e^{i|x|^2/4} u(1).
Field conformal_at_unit_time(const Field& u1);

/// Samples w(x) = u(x * scale) by trilinear interpolation. Points whose
/// preimage leaves the box read zero.
Field resample(const Field& u, double scale);

struct ConformalImage {
  Field field;
  /// | ||output|| - ||input|| | / ||input||: the change of variables is
  /// unitary, so this measures the interpolation error.
  double norm_defect = 0.0;
  /// Fraction of input mass that falls outside the sampled region.
  double lost_mass_fraction = 0.0;
  bool flagged = false;
};

/// t^{-3/2} e^{-i kappa |x|^2/4t} u(1/t, x/t) from the snapshot u(1/t).
ConformalImage general_conformal(const Field& u_at, double t,
                                 KineticSign sign = KineticSign::minus_laplacian);

enum class SignVariant { minus_2it, plus_2it };

/// Sign variant conserved by a flow with the given kinetic sign.
SignVariant natural_variant(KineticSign sign);

struct PseudoConformalReading {
  double time = 0.0;
  double dilation_term = 0.0;   // ||x u -+ 2 i t grad u||^2
  double potential_term = 0.0;  // 4 t^2 int V |u|^2
  double nonlinear_term = 0.0;  // sigma c lambda t^2 int |u|^{10/3}
  double total = 0.0;
};

/// Coefficient c of the nonlinear term that makes the quantity conserved,
/// 4n/(n+2) for the energy normalized with n/(n+2).
inline constexpr double pseudo_conformal_coefficient = 12.0 / 5.0;
/// The coefficient 2n/(n+2) as printed in the source identity.
inline constexpr double printed_pseudo_conformal_coefficient = 6.0 / 5.0;

PseudoConformalReading pseudo_conformal_quantity(const Field& u, double t, const EquationSpec& spec,
                                                 SignVariant variant, const RealField* potential,
                                                 double nonlinear_coefficient = pseudo_conformal_coefficient);

enum class RadiationMethod { exact_free, timestepped };

struct RadiationProfile {
  Field g;
  std::vector<std::pair<double, double>> cauchy_gaps;  // (delta, ||u~(delta) - u~(delta/2)||)
  RadiationMethod method = RadiationMethod::timestepped;
  Field u1;        // u(1)
  Field u1_tilde;  // conformal image at t = 1
  double delta_min = 0.0;
  bool cauchy = true;  // gaps decrease along the ladder
  bool aborted = false;
  std::string note;
};

struct RadiationOptions {
  double dt = 1e-3;
  const RealField* potential = nullptr;
};

/// Evolves f to t = 1, maps to u~(1) and runs the conjugated flow down the
/// delta ladder; g is u~ at the smallest delta. For free specs the
/// exact_free method propagates u~(1) by the exact kinetic flow instead.
RadiationProfile extract_radiation_profile(const Field& f, const EquationSpec& spec,
                                           const std::vector<double>& delta_ladder,
                                           const RadiationOptions& options = {},
                                           RadiationMethod method = RadiationMethod::timestepped);

struct GapReading {
  double gap = 0.0;
  double lost_mass_fraction = 0.0;
  bool flagged = false;
};

/// || u(t) - t^{-3/2} e^{i kappa |x|^2/4t} g(x/t) ||.
GapReading asymptotic_l2_gap(const Field& u_t, double t, const Field& g,
                             KineticSign sign = KineticSign::minus_laplacian);

struct RadiationInequality {
  double lhs = 0.0;  // ||f||^2 in the half-derivative norm
  double rhs = 0.0;  // (1/2) int |x| |g|^2
  double ratio = 0.0;
  bool satisfied = true;
  /// Present when u(1) was supplied: 4||grad u(1)||^2 + 4 int V|u(1)|^2
  /// (plus the nonlinear term for NLS) against ||g||^2 weighted by |x|^2.
  std::optional<double> spect_lhs;
  std::optional<double> spect_rhs;
  std::optional<double> spect_residual;
};

/// Linear specs assert lhs <= rhs (1 + slack); for NLS the ratio is reported.
RadiationInequality radiation_inequality_check(const Field& f, const Field& g, const EquationSpec& spec,
                                               const Field* u1 = nullptr, const RealField* potential = nullptr,
                                               double slack = 0.02);

}  // namespace cslab
