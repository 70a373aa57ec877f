#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace cslab {

using Rational = boost::rational<std::int64_t>;

/// Source term h_eta(r) = 1 for r <= 1 and eta / r^3 for r > 1.
/// At the jump r = 1 the value from below is returned.
struct SourceProfile {
  double eta = 0.0;
  double operator()(double r) const { return r <= 1.0 ? 1.0 : eta / (r * r * r); }
};

enum class TestFamily { appendix_n3, appendix_general, bump, capped_quadratic, custom };

std::string to_string(TestFamily family);

/// Radial multiplier profile phi with derivative evaluators in r = |x|.
///
/// Immutable after construction; all evaluators are pure.
class TestFunction {
 public:
  struct Evaluators {
    std::function<double(double)> phi_prime;
    std::function<double(double)> phi_second;
    /// Optional closed form of the bilaplacian; when absent the profile
    /// must be one whose bilaplacian vanishes (used for surrogates).
    std::function<double(double)> bilaplacian;
  };

  /// Arbitrary profile, mainly for surrogates and injected violations.
  static TestFunction custom(int dim, std::string name, Evaluators ev, double phi_prime_at_infinity);
  /// psi = r^2/2: identity hessian, zero bilaplacian.
  static TestFunction quadratic(int dim);
  /// psi constant: every derivative vanishes.
  static TestFunction constant(int dim);

  int dim() const { return dim_; }
  TestFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  double lambda() const { return lambda_; }
  double eta() const { return eta_; }
  /// Half-width of the plateau for the bump family, cap for capped_quadratic.
  double scale() const { return scale_; }
  double phi_prime_at_infinity() const { return phi_prime_inf_; }
  /// Radii where the profile is only finitely smooth (derivative jumps).
  const std::vector<double>& breakpoints() const { return phi_breakpoints_; }

  double phi(double r) const;
  double phi_prime(double r) const;
  double phi_second(double r) const;
  double laplacian(double r) const;
  /// Delta^2 phi; at r = 0 the limit value.
  double bilaplacian(double r) const;

 private:
  friend TestFunction build_phi_n3();
  friend TestFunction build_phi_general(int n, double eta);
  friend TestFunction build_bump_phi(double h_support, int dim);
  friend TestFunction build_capped_quadratic(double cap, int dim);

  TestFunction() = default;

  int dim_ = 3;
  TestFamily family_ = TestFamily::custom;
  std::string name_;
  double lambda_ = 0.0;
  double eta_ = 0.0;
  double scale_ = 0.0;
  double phi_prime_inf_ = 0.0;
  std::vector<double> phi_breakpoints_;
  Evaluators ev_;
};

/// n = 3 profile with eta = 0 and lambda = 1/6.
TestFunction build_phi_n3();

/// n >= 4 profile; eta must lie strictly inside admissible_eta_interval(n).
TestFunction build_phi_general(int n, double eta);
/// Same with eta at the midpoint of the admissible interval.
TestFunction build_phi_general(int n);

/// phi'' = h with h = 1 on [0, a], a smooth decay on [a, 2a], 0 beyond.
TestFunction build_bump_phi(double h_support, int dim = 3);

/// phi = c^2 (sqrt(1 + r^2/c^2) - 1): r^2/2 near the origin, slope capped at c.
TestFunction build_capped_quadratic(double cap, int dim = 3);

/// The smooth cutoff used by build_bump_phi and its first two derivatives.
struct BumpProfile {
  double a = 1.0;
  double value(double r) const;
  double first(double r) const;
  double second(double r) const;
  /// Integral of the profile over [0, r].
  double integral(double r) const;
};

struct EtaInterval {
  Rational lo;
  Rational hi;
  std::string binding_lower;  // which lower candidate is the max
  double lo_value() const { return boost::rational_cast<double>(lo); }
  double hi_value() const { return boost::rational_cast<double>(hi); }
  double midpoint() const { return 0.5 * (lo_value() + hi_value()); }
};

/// Open interval of admissible eta for n >= 4, by exact rational arithmetic.
EtaInterval admissible_eta_interval(int n);

/// lambda = ((1 + 2 eta) n - (3 + 6 eta)) / (2 n (n-2) (n-3)), exactly.
Rational appendix_lambda(int n, Rational eta);

struct ScaledDerivatives {
  double phi_prime;
  double phi_second;
  double laplacian;
  double bilaplacian;
};

/// Derivatives of phi_R(x) = R phi(x / R) at radius r.
ScaledDerivatives rescale(const TestFunction& tf, double R, double r);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string detail;
};

struct PropertyReport {
  std::string profile;
  int dim = 3;
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  const PropertyCheck& get(const std::string& name) const;
};

/// Checks the structural properties of an admissible multiplier profile on
/// the given radii (plus a geometric tail beyond the last one). Failures are
/// reported, never thrown.
PropertyReport verify_properties(const TestFunction& tf, const std::vector<double>& sample_radii);

}  // namespace cslab
