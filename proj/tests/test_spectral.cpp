#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cslab/error.hpp"
#include "cslab/spectral.hpp"

using namespace cslab;
using std::numbers::pi;

namespace {

Field gaussian(const Grid& g) {
  return Field::from_function(g, [](double x, double y, double z) {
    return Complex(std::exp(-(x * x + y * y + z * z) / 2.0), 0.0);
  });
}

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(n01(rng), n01(rng));
  return f;
}

double rel_l2(const Field& a, const Field& b) {
  return l2_distance(a, b) / compute_norm(b, NormKind::l2());
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g = make_grid(3, 10, 64);
  CHECK(g.spacing == doctest::Approx(0.3125).epsilon(1e-15));
  CHECK(g.frequencies.size() == 64);
  CHECK(g.frequencies.front() == doctest::Approx(-pi * 32 / 10));
  double maxabs = 0;
  bool has_zero = false;
  for (double k : g.frequencies) {
    maxabs = std::max(maxabs, std::abs(k));
    has_zero = has_zero || k == 0.0;
  }
  CHECK(maxabs == doctest::Approx(pi * 32 / 10));
  CHECK(has_zero);
  CHECK(g.coordinate(0) == doctest::Approx(-10 + 0.15625));
  CHECK_THROWS_AS(make_grid(3, 10, 7), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 0, 8), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 10, 6), ConfigError);
}

TEST_CASE("transform of a constant concentrates on zero frequency") {
  const Grid g = make_grid(3, 4, 16);
  Field one = Field::from_function(g, [](double, double, double) { return Complex(1, 0); });
  const Field hat = transform_pair(one, Direction::forward);
  CHECK(hat.domain() == Domain::frequency);
  double off = 0;
  for (std::size_t i = 1; i < hat.size(); ++i) off = std::max(off, std::abs(hat[i]));
  CHECK(off < 1e-12 * std::abs(hat[0]));
  // ||1||^2 = (2L)^3 must equal the frequency-side sum.
  CHECK(compute_norm(hat, NormKind::l2()) == doctest::Approx(std::pow(8.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("gaussian is its own unitary transform") {
  const Grid g = make_grid(3, 10, 64);
  const Field hat = transform_pair(gaussian(g), Direction::forward);
  double err = 0;
  for_each_frequency(g, [&](std::size_t i, double kx, double ky, double kz) {
    const double exact = std::exp(-(kx * kx + ky * ky + kz * kz) / 2.0);
    err = std::max(err, std::abs(hat[i] - exact));
  });
  CHECK(err <= 1e-8);
}

TEST_CASE("round trip and plancherel on random data") {
  const Grid g = make_grid(3, 3, 16);
  const Field f = random_field(g, 7);
  const Field hat = transform_pair(f, Direction::forward);
  const Field back = transform_pair(hat, Direction::inverse);
  CHECK(rel_l2(back, f) <= 1e-12);
  const double a = compute_norm(f, NormKind::l2());
  const double b = compute_norm(hat, NormKind::l2());
  CHECK(std::abs(a - b) <= 1e-10 * a);
}

TEST_CASE("fractional derivative") {
  const Grid g = make_grid(3, pi, 16);
  // Plane wave on a lattice frequency (2, -1, 3).
  const double k1 = 2, k2 = -1, k3 = 3;
  const Field w = Field::from_function(g, [&](double x, double y, double z) {
    return std::exp(Complex(0, k1 * x + k2 * y + k3 * z));
  });
  const double s = 0.7;
  const Field dw = fractional_derivative(w, s);
  const double mult = std::pow(std::sqrt(k1 * k1 + k2 * k2 + k3 * k3), s);
  double err = 0;
  for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(dw[i] - mult * w[i]));
  CHECK(err <= 1e-11 * mult);

  const Field f = random_field(g, 3);
  CHECK(rel_l2(fractional_derivative(f, 0.0), f) == 0.0);
  CHECK_THROWS_AS(fractional_derivative(f, 2.5), ConfigError);
  CHECK_THROWS_AS(fractional_derivative(f, -0.1), ConfigError);

  const Field ab = fractional_derivative(fractional_derivative(f, 0.6), 0.9);
  CHECK(rel_l2(ab, fractional_derivative(f, 1.5)) <= 1e-10);
}

TEST_CASE("s = 2 matches the analytic negative laplacian of a gaussian") {
  const Grid g = make_grid(3, 10, 64);
  const Field d2 = fractional_derivative(gaussian(g), 2.0);
  const Field exact = Field::from_function(g, [](double x, double y, double z) {
    const double r2 = x * x + y * y + z * z;
    return Complex((3.0 - r2) * std::exp(-r2 / 2.0), 0.0);
  });
  CHECK(rel_l2(d2, exact) <= 1e-10);
  CHECK(rel_l2(minus_laplacian(gaussian(g)), d2) <= 1e-14);
}

TEST_CASE("gradient split") {
  const Grid g = make_grid(3, 8, 64);
  SUBCASE("radial field has no tangential part") {
    const Field u = Field::from_function(g, [](double x, double y, double z) {
      return Complex(std::exp(-(x * x + y * y + z * z)), 0.0);
    });
    const GradientSplit s = gradient_split(u);
    double worst = 0;
    for (double v : s.tangential_sq) worst = std::max(worst, v);
    CHECK(worst <= 1e-10);
  }
  SUBCASE("field depending on x1 only") {
    // Cell-centred grids have no sample on the x1 axis, so compare with the
    // exact split |u'|^2 (1 - x^2/r^2), which vanishes as the axis is approached.
    const Grid h = make_grid(3, pi, 32);
    const Field u = Field::from_function(h, [](double x, double, double) { return Complex(std::sin(x), 0); });
    const GradientSplit s = gradient_split(u);
    double worst = 0;
    for_each_point(h, [&](std::size_t i, double x, double y, double z) {
      const double r2 = x * x + y * y + z * z;
      const double exact = std::cos(x) * std::cos(x) * (y * y + z * z) / r2;
      worst = std::max(worst, std::abs(s.tangential_sq[i] - exact));
    });
    CHECK(worst <= 1e-10);
  }
  SUBCASE("pythagoras on random data") {
    const Field u = random_field(g, 11);
    const GradientSplit s = gradient_split(u);
    const auto grad = gradient(u);
    double worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double direct = 0;
      for (const auto& c : grad) direct += std::norm(c[i]);
      const double sum = s.radial_sq[i] + s.tangential_sq[i];
      worst = std::max(worst, std::abs(sum - direct) / std::max(direct, 1e-300));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("norms of the unit gaussian") {
  const Grid g = make_grid(3, 10, 64);
  const Field f = gaussian(g);
  const double l2 = compute_norm(f, NormKind::l2());
  CHECK(l2 * l2 == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-10));
  const double l2hat = compute_norm(transform_pair(f, Direction::forward), NormKind::l2());
  CHECK(std::abs(l2 - l2hat) <= 1e-10 * l2);
  // int |xi| e^{-|xi|^2} dxi = 4 pi int r^3 e^{-r^2} dr = 2 pi.
  // The |xi| and |x| weights have a cone at the origin, so the lattice sums
  // carry an O(spacing^4)-type error; check the size and that it shrinks.
  const double h = compute_norm(f, NormKind::hdot(0.5));
  CHECK(h * h == doctest::Approx(2 * pi).epsilon(1e-3));
  const double w2 = compute_norm(f, NormKind::weighted(2));
  CHECK(w2 * w2 == doctest::Approx(1.5 * std::pow(pi, 1.5)).epsilon(1e-10));
  // int |x| e^{-|x|^2} = 2 pi.
  const double w1 = compute_norm(f, NormKind::weighted(1));
  CHECK(w1 * w1 == doctest::Approx(2 * pi).epsilon(1e-3));
  const Grid fine = make_grid(3, 20, 128);
  const Field ff = gaussian(fine);
  const double hf = compute_norm(ff, NormKind::hdot(0.5));
  CHECK(std::abs(hf * hf - 2 * pi) < std::abs(h * h - 2 * pi) / 8);
  const Grid dense = make_grid(3, 10, 128);
  const double w1f = compute_norm(gaussian(dense), NormKind::weighted(1));
  CHECK(std::abs(w1f * w1f - 2 * pi) < std::abs(w1 * w1 - 2 * pi) / 8);
  // ||f||_p^p = (2 pi / p)^{3/2}.
  const double p = 10.0 / 3.0;
  CHECK(std::pow(compute_norm(f, NormKind::lp(p)), p) == doctest::Approx(std::pow(2 * pi / p, 1.5)).epsilon(1e-10));
  CHECK_THROWS(NormKind::hdot(3.0));
  CHECK_THROWS(NormKind::weighted(3.0));
  CHECK_THROWS(NormKind::lp(0.5));
}

TEST_CASE("half derivative interpolates between L2 and H1") {
  const Grid g = make_grid(3, 3, 16);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Field f = random_field(g, seed);
    const double half = compute_norm(f, NormKind::hdot(0.5));
    const double bound = std::sqrt(compute_norm(f, NormKind::l2()) * compute_norm(f, NormKind::hdot(1.0)));
    CHECK(half <= bound + 1e-10);
  }
}

TEST_CASE("space-time norms on trivial trajectories") {
  const Grid g = make_grid(3, 2, 8);
  std::vector<Field> zero{Field(g, 0.0), Field(g, 0.5), Field(g, 1.0)};
  CHECK(spacetime_norm(zero, 2, 2) == 0.0);
  std::vector<Field> c;
  for (double t : {0.0, 0.3, 1.0}) {
    Field f = Field::from_function(g, [](double, double, double) { return Complex(0.7, 0.0); }, t);
    c.push_back(f);
  }
  CHECK(spacetime_norm(c, 2, 2) == doctest::Approx(compute_norm(c[0], NormKind::l2())).epsilon(1e-13));
  CHECK(spacetime_norm(c, std::numeric_limits<double>::infinity(), 2) ==
        doctest::Approx(compute_norm(c[0], NormKind::l2())));
  CHECK_THROWS(spacetime_norm(std::span<const Field>(c.data(), 1), 2, 2));
  std::swap(c[0], c[1]);
  CHECK_THROWS(spacetime_norm(c, 2, 2));
}
