#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cslab/conformal.hpp"
#include "cslab/error.hpp"
#include "cslab/spectral.hpp"
#include "oracles.hpp"

using namespace cslab;

namespace {

double rel(const Field& a, const Field& b) { return l2_distance(a, b) / compute_norm(b, NormKind::l2()); }

Field gaussian(const Grid& g, double width, std::array<double, 3> x0 = {0, 0, 0},
               std::array<double, 3> v = {0, 0, 0}) {
  return oracle::FreeGaussian{width, x0, v}.sample(g, 0.0);
}

}  // namespace

TEST_CASE("dephasing at unit time") {
  const Grid g = make_grid(3, 6, 32);
  const Field u = gaussian(g, 1.0, {0.5, 0, 0}, {0.3, 0, 0});
  const Field w = conformal_at_unit_time(u);
  double worst = 0.0;
  for_each_point(g, [&](std::size_t i, double x, double y, double z) {
    worst = std::max(worst, std::abs(std::abs(w[i]) - std::abs(u[i])));
    const Complex expect = u[i] * std::polar(1.0, (x * x + y * y + z * z) / 4.0);
    CHECK(std::abs(w[i] - expect) <= 1e-14);
  });
  CHECK(worst <= 1e-15);
  CHECK(std::abs(mass(w) - mass(u)) <= 1e-13 * mass(u));

  // The two kinetic signs use conjugate factors.
  const Field back = dephase(w, 1.0, KineticSign::plus_laplacian);
  CHECK(rel(back, u) <= 1e-14);
  CHECK_THROWS_AS(dephase(u, 0.0), ConfigError);
}

TEST_CASE("general conformal map") {
  const Grid g = make_grid(3, 8, 48);
  const Field u = gaussian(g, 1.0, {0, 0, 0}, {0.4, 0, 0});

  SUBCASE("t = 1 is the unit-time map") {
    const auto img = general_conformal(u, 1.0);
    CHECK(rel(img.field, conformal_at_unit_time(u)) <= 1e-14);
    CHECK(img.norm_defect <= 1e-14);
    CHECK_FALSE(img.flagged);
  }
  SUBCASE("unitary up to interpolation for t in [1/2, 2]") {
    const Grid big = make_grid(3, 10, 60);
    const Field wide = gaussian(big, 1.5, {0, 0, 0}, {0.4, 0, 0});
    for (double t : {0.5, 0.75, 1.5, 2.0}) {
      const auto img = general_conformal(wide, t);
      CHECK(img.norm_defect <= 0.02);
      CHECK_FALSE(img.flagged);
    }
  }
  SUBCASE("mass leaving the sampled region is flagged") {
    const Field wide = gaussian(g, 2.0);
    const auto img = general_conformal(wide, 4.0);
    CHECK(img.lost_mass_fraction > 1e-4);
    CHECK(img.flagged);
  }
  SUBCASE("resampling a linear ramp is exact inside the box") {
    const Field ramp = Field::from_function(g, [](double x, double y, double z) { return Complex(x + 2 * y - z, y); });
    const Field half = resample(ramp, 0.5);
    for_each_point(g, [&](std::size_t i, double x, double y, double z) {
      CHECK(std::abs(half[i] - Complex(0.5 * (x + 2 * y - z), 0.5 * y)) <= 1e-12);
    });
  }
}

TEST_CASE("pseudo-conformal quantity") {
  const Grid g = make_grid(3, 16, 64);
  const Field f = gaussian(g, 1.0, {1.0, 0, 0}, {0.5, 0, 0});

  SUBCASE("t = 0 reduces to the second moment") {
    const auto r = pseudo_conformal_quantity(f, 0.0, EquationSpec{}, SignVariant::minus_2it, nullptr);
    const double x2 = compute_norm(f, NormKind::weighted(2));
    CHECK(r.total == doctest::Approx(x2 * x2).epsilon(1e-12));
    CHECK(r.potential_term == 0.0);
    CHECK(r.nonlinear_term == 0.0);
  }
  SUBCASE("conserved by the exact free flow with the natural sign") {
    for (auto k : {KineticSign::minus_laplacian, KineticSign::plus_laplacian}) {
      const auto spec = EquationSpec::free(k);
      const auto q0 = pseudo_conformal_quantity(f, 0.0, spec, natural_variant(k), nullptr).total;
      for (double t : {0.5, 1.0}) {
        const Field u = free_propagate(f, t, k);
        const auto q = pseudo_conformal_quantity(u, t, spec, natural_variant(k), nullptr).total;
        CHECK(std::abs(q - q0) <= 1e-8 * q0);
        const SignVariant wrong =
            natural_variant(k) == SignVariant::minus_2it ? SignVariant::plus_2it : SignVariant::minus_2it;
        CHECK(std::abs(pseudo_conformal_quantity(u, t, spec, wrong, nullptr).total - q0) > 1e-2 * q0);
      }
    }
  }
}

TEST_CASE("free radiation profile") {
  const Grid g = make_grid(3, 12, 48);
  const Field f = gaussian(g, 1.0, {0.5, 0, 0});
  const EquationSpec spec;  // free, minus_laplacian
  const std::vector<double> ladder{0.032, 0.016, 0.008, 0.004};

  const auto exact = extract_radiation_profile(f, spec, ladder, {}, RadiationMethod::exact_free);
  REQUIRE_FALSE(exact.aborted);
  CHECK(exact.cauchy);
  CHECK(exact.cauchy_gaps.size() == ladder.size());
  CHECK(std::abs(std::sqrt(mass(exact.g) / mass(f)) - 1.0) <= 1e-12);

  // Modulus of the limit: |g(y)| = 2^{-3/2} |f^(y/2)| = 2^{-3/2} exp(-|y|^2/8).
  const Field modulus = Field::from_function(g, [](double x, double y, double z) {
    return Complex(std::pow(2.0, -1.5) * std::exp(-(x * x + y * y + z * z) / 8.0), 0.0);
  });
  Field abs_g = exact.g;
  for (auto& z : abs_g.values()) z = std::abs(z);
  CHECK(rel(abs_g, modulus) <= 0.02);

  SUBCASE("timestepped agrees with the exact kinetic flow") {
    const auto stepped = extract_radiation_profile(f, spec, ladder, {0.004, nullptr});
    CHECK(rel(stepped.g, exact.g) <= 1e-6);
  }
  SUBCASE("gaps shrink with delta") {
    for (std::size_t i = 1; i < exact.cauchy_gaps.size(); ++i) {
      const double ratio = exact.cauchy_gaps[i - 1].second / exact.cauchy_gaps[i].second;
      CHECK(ratio > 1.5);
      CHECK(ratio < 3.0);
    }
  }
  SUBCASE("asymptotic gap decreases in time") {
    const auto a = asymptotic_l2_gap(free_propagate(f, 1.0, spec.kinetic_sign), 1.0, exact.g);
    const auto b = asymptotic_l2_gap(free_propagate(f, 2.0, spec.kinetic_sign), 2.0, exact.g);
    CHECK_FALSE(b.flagged);
    CHECK(b.gap < a.gap);
  }
  SUBCASE("radiation inequality holds with equality in the free case") {
    const auto ri = radiation_inequality_check(f, exact.g, spec, &exact.u1);
    CHECK(ri.satisfied);
    CHECK(ri.ratio == doctest::Approx(1.0).epsilon(0.02));
    REQUIRE(ri.spect_residual);
    CHECK(*ri.spect_residual <= 1e-3);
  }
  SUBCASE("the half-derivative norm decays like 1/(2t)") {
    const double t = 2.0;
    const Field w = dephase(free_propagate(f, t, spec.kinetic_sign), t, spec.kinetic_sign);
    const double lhs = std::pow(compute_norm(w, NormKind::hdot(0.5)), 2);
    const double rhs = std::pow(compute_norm(f, NormKind::weighted(1)), 2) / (2.0 * t);
    CHECK(lhs <= rhs * 1.02);
  }
}

TEST_CASE("radiation of zero data") {
  const Grid g = make_grid(3, 6, 16);
  const Field zero(g);
  EquationSpec spec;
  spec.nonlinearity = NonlinearitySign::defocusing;
  spec.coupling = 1.0;
  const auto prof = extract_radiation_profile(zero, spec, {0.1, 0.05}, {0.01, nullptr});
  CHECK(mass(prof.g) == 0.0);
  const auto ri = radiation_inequality_check(zero, prof.g, spec, &prof.u1);
  CHECK(ri.lhs == 0.0);
  CHECK(ri.rhs == 0.0);
  CHECK(ri.satisfied);

  CHECK_THROWS_AS(extract_radiation_profile(zero, spec, {0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(extract_radiation_profile(zero, spec, {0.1}, {}, RadiationMethod::exact_free), ConfigError);
}
