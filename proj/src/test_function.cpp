#include "cslab/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cslab/error.hpp"

namespace cslab {
namespace {

double integrate_gk(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

// Delta^2 of a radial function from its first four radial derivatives.
double radial_bilaplacian(int n, double r, double d1, double d2, double d3, double d4) {
  const double m = n - 1;
  return d4 + 2.0 * m * d3 / r + m * (n - 3) * (d2 / (r * r) - d1 / (r * r * r));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string fmt(const Rational& q) {
  std::ostringstream os;
  os << q.numerator();
  if (q.denominator() != 1) os << "/" << q.denominator();
  return os.str();
}

}  // namespace

std::string to_string(TestFamily family) {
  switch (family) {
    case TestFamily::appendix_n3: return "appendix_n3";
    case TestFamily::appendix_general: return "appendix_general";
    case TestFamily::bump: return "bump";
    case TestFamily::capped_quadratic: return "capped_quadratic";
    case TestFamily::custom: return "custom";
  }
  return "unknown";
}

TestFunction TestFunction::custom(int dim, std::string name, Evaluators ev,
                                  double phi_prime_at_infinity) {
  TestFunction tf;
  tf.dim_ = dim;
  tf.family_ = TestFamily::custom;
  tf.name_ = std::move(name);
  tf.ev_ = std::move(ev);
  tf.phi_prime_inf_ = phi_prime_at_infinity;
  return tf;
}

TestFunction TestFunction::quadratic(int dim) {
  return custom(dim, "quadratic",
                {[](double r) { return r; }, [](double) { return 1.0; },
                 [](double) { return 0.0; }},
                std::numeric_limits<double>::infinity());
}

TestFunction TestFunction::constant(int dim) {
  return custom(dim, "constant",
                {[](double) { return 0.0; }, [](double) { return 0.0; },
                 [](double) { return 0.0; }},
                0.0);
}

double TestFunction::phi_prime(double r) const { return ev_.phi_prime(r); }
double TestFunction::phi_second(double r) const { return ev_.phi_second(r); }

double TestFunction::laplacian(double r) const {
  if (r == 0.0) return dim_ * ev_.phi_second(0.0);
  return ev_.phi_second(r) + (dim_ - 1) * ev_.phi_prime(r) / r;
}

double TestFunction::bilaplacian(double r) const {
  return ev_.bilaplacian ? ev_.bilaplacian(r) : 0.0;
}

double TestFunction::phi(double r) const {
  // phi(0) = 0; integrate phi' piecewise between the smoothness breaks.
  double acc = 0.0;
  double lo = 0.0;
  const auto d1 = ev_.phi_prime;
  for (double b : phi_breakpoints_) {
    if (b >= r) break;
    acc += integrate_gk(d1, lo, b);
    lo = b;
  }
  return acc + integrate_gk(d1, lo, r);
}

TestFunction build_phi_n3() {
  TestFunction tf;
  tf.dim_ = 3;
  tf.family_ = TestFamily::appendix_n3;
  tf.name_ = "appendix_n3";
  tf.lambda_ = 1.0 / 6.0;
  tf.eta_ = 0.0;
  tf.phi_breakpoints_ = {1.0};
  const double lam = tf.lambda_;
  tf.ev_.phi_prime = [lam](double r) {
    if (r <= 1.0) return lam * r - r * r * r / 30.0;
    // lambda r - r/6 grouped first so the cancellation is exact for large r.
    return (lam - 1.0 / 6.0) * r + 1.0 / 6.0 - 1.0 / (30.0 * r * r);
  };
  tf.ev_.phi_second = [](double r) {
    if (r <= 1.0) return 1.0 / 6.0 - r * r / 10.0;
    return 1.0 / (15.0 * r * r * r);
  };
  const SourceProfile h{0.0};
  tf.ev_.bilaplacian = [h](double r) { return -h(r); };
  // lambda r - r/6 cancels for lambda = 1/6, leaving 1/6 - 1/(30 r^2).
  tf.phi_prime_inf_ = 1.0 / 6.0;
  return tf;
}

Rational appendix_lambda(int n, Rational eta) {
  const Rational num = (1 + 2 * eta) * n - (3 + 6 * eta);
  return num / Rational(2 * n * (n - 2) * (n - 3));
}

EtaInterval admissible_eta_interval(int n) {
  if (n < 4) throw ParameterError("admissible eta interval requires n >= 4, got " + std::to_string(n));
  const std::int64_t m = n;
  const Rational first(m - 3, m);
  const Rational second(-2 * m * m + 8 * m - 6, m * m * m - 2 * m * m - 5 * m + 6);
  const Rational hi(m * m * m - 6 * m * m + 11 * m - 6, (m - 2) * (m + 2) * (m - 3));
  EtaInterval iv;
  if (first >= second) {
    iv.lo = first;
    iv.binding_lower = "(n-3)/n";
  } else {
    iv.lo = second;
    iv.binding_lower = "(-2n^2+8n-6)/(n^3-2n^2-5n+6)";
  }
  iv.hi = hi;
  if (iv.lo >= iv.hi)
    throw std::logic_error("admissible eta interval is empty for n = " + std::to_string(n));
  return iv;
}

TestFunction build_phi_general(int n) {
  return build_phi_general(n, admissible_eta_interval(n).midpoint());
}

TestFunction build_phi_general(int n, double eta) {
  const EtaInterval iv = admissible_eta_interval(n);
  if (!(eta > iv.lo_value()))
    throw ParameterError("eta = " + fmt(eta) + " violates the lower bound eta > " + fmt(iv.lo) +
                         " for n = " + std::to_string(n));
  if (!(eta < iv.hi_value()))
    throw ParameterError("eta = " + fmt(eta) + " violates the upper bound eta < " + fmt(iv.hi) +
                         " for n = " + std::to_string(n));

  const double nn = n;
  const double lam = ((1 + 2 * eta) * nn - (3 + 6 * eta)) / (2 * nn * (nn - 2) * (nn - 3));
  const double poly = (1 - eta) * std::pow(nn, 4) + (3 * eta - 6) * std::pow(nn, 3) +
                      (11 + 4 * eta) * nn * nn - (12 * eta + 6) * nn;
  const double c_in = 1.0 / (2 * nn * (nn + 2));
  const double c_const = eta / ((nn - 1) * (nn - 3));
  const double c_lin = lam;  // printed coefficient of r, equal to lambda
  const double c_a = (eta * nn - nn + 3) / (2 * nn * (nn - 2) * (nn - 3));
  const double c_b = poly / (2 * nn * nn * (nn - 1) * (nn - 2) * (nn - 3) * (nn + 2));
  const double d2_a = (eta * nn - nn + 3) / (2 * nn * (nn - 2));
  const double d2_b = poly / (2 * nn * nn * (nn - 2) * (nn - 3) * (nn + 2));

  TestFunction tf;
  tf.dim_ = n;
  tf.family_ = TestFamily::appendix_general;
  tf.name_ = "appendix_general";
  tf.lambda_ = lam;
  tf.eta_ = eta;
  tf.phi_breakpoints_ = {1.0};
  tf.ev_.phi_prime = [=](double r) {
    if (r <= 1.0) return lam * r - c_in * r * r * r;
    return (lam - c_lin) * r + c_const - c_a * std::pow(r, 3 - nn) - c_b * std::pow(r, 1 - nn);
  };
  tf.ev_.phi_second = [=](double r) {
    if (r <= 1.0) return lam - 3 * c_in * r * r;
    return d2_a * std::pow(r, 2 - nn) + d2_b * std::pow(r, -nn);
  };
  const SourceProfile h{eta};
  tf.ev_.bilaplacian = [h](double r) { return -h(r); };
  tf.phi_prime_inf_ = c_const;
  return tf;
}

double BumpProfile::value(double r) const {
  if (r <= a) return 1.0;
  if (r >= 2 * a) return 0.0;
  const double z = (r - a) / a;
  return std::exp(1.0 - 1.0 / (1.0 - z * z));
}

double BumpProfile::first(double r) const {
  if (r <= a || r >= 2 * a) return 0.0;
  const double z = (r - a) / a;
  const double q = 1.0 / (1.0 - z * z);
  const double b = std::exp(1.0 - q);
  return -2.0 * z * q * q * b / a;
}

double BumpProfile::second(double r) const {
  if (r <= a || r >= 2 * a) return 0.0;
  const double z = (r - a) / a;
  const double q = 1.0 / (1.0 - z * z);
  const double b = std::exp(1.0 - q);
  return b * (-2.0 * q * q - 8.0 * z * z * q * q * q + 4.0 * z * z * q * q * q * q) / (a * a);
}

double BumpProfile::integral(double r) const {
  if (r <= a) return std::max(r, 0.0);
  const double top = std::min(r, 2 * a);
  return a + integrate_gk([this](double s) { return value(s); }, a, top);
}

TestFunction build_bump_phi(double h_support, int dim) {
  if (!(h_support > 0.0)) throw ParameterError("bump support must be positive");
  const BumpProfile bump{h_support};
  TestFunction tf;
  tf.dim_ = dim;
  tf.family_ = TestFamily::bump;
  tf.name_ = "bump";
  tf.scale_ = h_support;
  tf.phi_breakpoints_ = {h_support, 2 * h_support};
  const double tail = bump.integral(2 * h_support);
  tf.phi_prime_inf_ = tail;
  tf.ev_.phi_prime = [bump, tail](double r) {
    return r >= 2 * bump.a ? tail : bump.integral(r);
  };
  tf.ev_.phi_second = [bump](double r) { return bump.value(r); };
  tf.ev_.bilaplacian = [bump, dim, tail](double r) {
    if (r <= bump.a) return 0.0;  // phi = r^2/2 on the plateau
    const double d1 = r >= 2 * bump.a ? tail : bump.integral(r);
    return radial_bilaplacian(dim, r, d1, bump.value(r), bump.first(r), bump.second(r));
  };
  return tf;
}

TestFunction build_capped_quadratic(double cap, int dim) {
  if (!(cap > 0.0)) throw ParameterError("capped quadratic needs a positive cap");
  TestFunction tf;
  tf.dim_ = dim;
  tf.family_ = TestFamily::capped_quadratic;
  tf.name_ = "capped_quadratic";
  tf.scale_ = cap;
  tf.phi_prime_inf_ = cap;
  const double c2 = cap * cap;
  tf.ev_.phi_prime = [c2](double r) { return r / std::sqrt(1.0 + r * r / c2); };
  tf.ev_.phi_second = [c2](double r) { return std::pow(1.0 + r * r / c2, -1.5); };
  tf.ev_.bilaplacian = [c2, dim](double r) {
    const double w = 1.0 + r * r / c2;
    const double m = dim - 1;
    const double d4 = -3.0 / c2 * std::pow(w, -2.5) + 15.0 * r * r / (c2 * c2) * std::pow(w, -3.5);
    const double d3_over_r = -3.0 / c2 * std::pow(w, -2.5);
    // phi''/r^2 - phi'/r^3 simplifies to -w^{-3/2}/c^2.
    return d4 + 2.0 * m * d3_over_r + m * (dim - 3) * (-std::pow(w, -1.5) / c2);
  };
  return tf;
}

ScaledDerivatives rescale(const TestFunction& tf, double R, double r) {
  if (!(R > 0.0)) throw ParameterError("rescale factor must be positive");
  const double s = r / R;
  return {tf.phi_prime(s), tf.phi_second(s) / R, tf.laplacian(s) / R,
          tf.bilaplacian(s) / (R * R * R)};
}

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const PropertyCheck& PropertyReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no property check named " + name);
}

PropertyReport verify_properties(const TestFunction& tf, const std::vector<double>& sample_radii) {
  if (sample_radii.empty()) throw ParameterError("verify_properties needs sample radii");
  if (!std::is_sorted(sample_radii.begin(), sample_radii.end()) || sample_radii.front() <= 0.0)
    throw ParameterError("sample radii must be positive and sorted");

  PropertyReport rep;
  rep.profile = tf.name();
  rep.dim = tf.dim();

  // Geometric tail used to judge boundedness and the limit at infinity.
  std::vector<double> tail;
  for (int k = 1; k <= 4; ++k) tail.push_back(sample_radii.back() * std::pow(10.0, k));
  std::vector<double> all = sample_radii;
  all.insert(all.end(), tail.begin(), tail.end());

  {
    PropertyCheck c{"origin", false, tf.phi_second(0.0), ""};
    const double phi0 = tf.phi(0.0);
    const double d10 = tf.phi_prime(0.0);
    c.passed = phi0 == 0.0 && std::abs(d10) <= 1e-15 && tf.phi_second(0.0) > 0.0;
    c.detail = "phi(0)=" + fmt(phi0) + " phi'(0)=" + fmt(d10) + " phi''(0)=" + fmt(c.measured);
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"bilaplacian_nonpositive", true, -std::numeric_limits<double>::infinity(), ""};
    for (double r : all) {
      const double v = tf.bilaplacian(r);
      c.measured = std::max(c.measured, v);
      if (v > 0.0) c.passed = false;
    }
    c.detail = "max Delta^2 phi = " + fmt(c.measured);
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"positive_derivatives", true, std::numeric_limits<double>::infinity(), ""};
    for (double r : sample_radii) {
      const double v = std::min(tf.phi_prime(r), tf.phi_second(r));
      c.measured = std::min(c.measured, v);
      if (!(v > 0.0)) c.passed = false;
    }
    c.detail = "min(phi', phi'') on samples = " + fmt(c.measured);
    rep.checks.push_back(c);
  }

  // Bounded means: finite on the samples and convergent along the tail.
  auto bounded = [&](const std::string& name, auto&& q) {
    PropertyCheck c{name, true, 0.0, ""};
    for (double r : all) {
      const double v = q(r);
      if (!std::isfinite(v)) c.passed = false;
      c.measured = std::max(c.measured, std::abs(v));
    }
    double prev_step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < tail.size(); ++k) {
      const double step = std::abs(q(tail[k]) - q(tail[k - 1]));
      if (step > 1e-12 && step > prev_step) c.passed = false;
      prev_step = step;
    }
    c.detail = "sup = " + fmt(c.measured);
    rep.checks.push_back(c);
  };
  bounded("phi_prime_bounded", [&](double r) { return tf.phi_prime(r); });
  bounded("r_phi_second_bounded", [&](double r) { return r * tf.phi_second(r); });
  bounded("laplacian_decay", [&](double r) { return std::abs(tf.laplacian(r)) * (1.0 + r); });

  {
    const double lim = tf.phi_prime_at_infinity();
    const double far = tf.phi_prime(tail.back());
    PropertyCheck c{"limit_at_infinity", false, lim, ""};
    c.passed = std::isfinite(lim) && lim > 0.0 &&
               std::abs(far - lim) <= 1e-6 * std::max(1.0, std::abs(lim));
    c.detail = "phi'(inf) = " + fmt(lim) + ", phi'(" + fmt(tail.back()) + ") = " + fmt(far);
    rep.checks.push_back(c);
  }
  {
    // Hessian lower bound inside the unit ball: min(phi'', phi'/r) > 0.
    PropertyCheck c{"hessian_inner_coercive", true, std::numeric_limits<double>::infinity(), ""};
    bool any = false;
    for (double r : sample_radii) {
      if (r >= 1.0) continue;
      any = true;
      c.measured = std::min({c.measured, tf.phi_second(r), tf.phi_prime(r) / r});
    }
    c.passed = !any || c.measured > 0.0;
    if (!any) c.measured = 0.0;
    c.detail = "C = " + fmt(c.measured);
    rep.checks.push_back(c);
  }
  {
    // Tangential bound outside the unit ball: phi' >= C so phi'/|x| >= C/|x|.
    PropertyCheck c{"hessian_outer_tangential", true, std::numeric_limits<double>::infinity(), ""};
    bool any = false;
    for (double r : all) {
      if (r <= 1.0) continue;
      any = true;
      c.measured = std::min(c.measured, tf.phi_prime(r));
    }
    c.passed = !any || c.measured > 0.0;
    if (!any) c.measured = 0.0;
    c.detail = "C = " + fmt(c.measured);
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace cslab
