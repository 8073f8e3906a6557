#include "doctest.h"

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torus_stab/errors.hpp"
#include "torus_stab/sobolev.hpp"

using namespace torus_stab;
using test_util::max_diff;
using test_util::random_field;
constexpr double pi = std::numbers::pi;

TEST_CASE("grid nodes and wavenumbers") {
  const TorusGrid g = make_grid(8);
  const auto x = g.nodes();
  REQUIRE(x.size() == 8);
  for (int j = 0; j < 8; ++j) CHECK(x[j] == doctest::Approx(j * pi / 4).epsilon(1e-15));
  const auto k = make_grid(256).wavenumbers();
  CHECK(k.front() == -127);
  CHECK(k.back() == 128);
  CHECK(k.size() == 256);
  CHECK(make_grid(256).nyquist() == 128);
}

TEST_CASE("grid size validation names the bound") {
  CHECK_THROWS_WITH_AS(make_grid(7), doctest::Contains("n must be even"), ConfigError);
  CHECK_THROWS_WITH_AS(make_grid(6), doctest::Contains("at least 8"), ConfigError);
  CHECK_THROWS_WITH_AS(make_grid(1 << 21), doctest::Contains("2^20"), ConfigError);
  CHECK_NOTHROW(make_grid(1 << 20));
}

TEST_CASE("transform round trip and conjugate symmetry") {
  const TorusGrid g(64);
  const Field f = Field::sample(g, [](double x) { return std::exp(std::sin(x)) - 0.3 * std::cos(5 * x); });
  const Field back = f.spectrum().to_field();
  CHECK(max_diff(f, back) <= 1e-13 * f.max_abs());
  const Spectrum s = f.spectrum();
  for (int k = 1; k < g.nyquist(); ++k) CHECK(std::abs(s(-k) - std::conj(s(k))) == 0.0);
  CHECK(s(g.nyquist()).imag() == doctest::Approx(0.0));
}

// Sample roundoff at wavenumber k is amplified by k^m, so the exact oracles
// run on a small grid.
TEST_CASE("spectral derivatives") {
  const TorusGrid g(16);
  const Field s1 = Field::sample(g, [](double x) { return std::sin(x); });
  const Field c1 = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(max_diff(derivative(s1, 1), c1) <= 1e-13);

  const Field s3 = Field::sample(g, [](double x) { return std::sin(3 * x); });
  const Field d5 = Field::sample(g, [](double x) { return 243.0 * std::cos(3 * x); });
  CHECK(max_diff(derivative(s3, 5), d5) <= 1e-13 * 243);

  const Field c = Field::constant(g, 2.5);
  for (int m = 1; m <= 7; ++m) CHECK(derivative(c, m).max_abs() <= 1e-14);
  CHECK(max_diff(derivative(c, 0), c) == 0.0);

  CHECK_THROWS_AS(derivative(c, 8), UnsupportedOrderError);
  CHECK_THROWS_AS(derivative(c, -1), UnsupportedOrderError);
}

TEST_CASE("odd derivatives drop the Nyquist mode") {
  const TorusGrid g(16);
  const Field nyq = Field::sample(g, [](double x) { return std::cos(8 * x); });
  CHECK(derivative(nyq, 1).max_abs() <= 1e-14);
  CHECK(max_diff(derivative(nyq, 2), -64.0 * nyq) <= 1e-11);
}

TEST_CASE("differentiation composes") {
  const TorusGrid g(128);
  const Field f = random_field(g, 3, 20);
  const Field d11 = derivative(derivative(f, 1), 1);
  const Field d2 = derivative(f, 2);
  CHECK(max_diff(d11, d2) <= 1e-12 * d2.max_abs());
  CHECK(max_diff(derivative(derivative(f, 3), 4), derivative(f, 7)) <= 1e-12 * derivative(f, 7).max_abs());
}

TEST_CASE("hs_inner closed forms") {
  const TorusGrid g(32);
  const SobolevIndex idx(2.0, 1.0, 1.0);
  const Field one = Field::constant(g, 1.0);
  for (double s : {0.0, 1.0, 2.0, 3.5})
    CHECK(hs_inner(one, one, SobolevIndex(s, 1.0, 1.0)) == doctest::Approx(2 * pi).epsilon(1e-14));
  const Field sx = Field::sample(g, [](double x) { return std::sin(x); });
  const Field cx = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(std::abs(hs_inner(sx, cx, idx)) <= 1e-14);
  const Field s2 = Field::sample(g, [](double x) { return std::sin(2 * x); });
  CHECK(hs_inner(s2, s2, idx) == doctest::Approx(21 * pi).epsilon(1e-14));

  // Dense quadrature of ∫u² + u_x² + u_xx² for u = sin 2x.
  double quad = 0.0;
  const int m = 4096;
  for (int j = 0; j < m; ++j) {
    const double x = 2 * pi * j / m;
    quad += std::pow(std::sin(2 * x), 2) + std::pow(2 * std::cos(2 * x), 2) + std::pow(4 * std::sin(2 * x), 2);
  }
  quad *= 2 * pi / m;
  CHECK(hs_inner(s2, s2, idx) == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("hs_inner rejects mismatched grids and bad indices") {
  const Field a = Field::zeros(TorusGrid(16));
  const Field b = Field::zeros(TorusGrid(32));
  CHECK_THROWS_AS(hs_inner(a, b, SobolevIndex(2, 1, 1)), IncompatibleGridError);
  CHECK_THROWS_AS(SobolevIndex(-1, 1, 1), ParameterError);
  CHECK_THROWS_AS(SobolevIndex(2, 0, 1), ParameterError);
  CHECK_THROWS_AS(SobolevIndex(2, 1, -1), ParameterError);
}

TEST_CASE("Parseval against collocation sums") {
  const TorusGrid g(64);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Field u = random_field(g, 2 * i + 1, 20);
    const Field v = random_field(g, 2 * i + 2, 20);
    double direct = 0.0;
    for (int j = 0; j < g.size(); ++j) direct += u[j] * v[j];
    direct *= g.spacing();
    const double spectral = hs_inner(u, v, SobolevIndex(0.0, 1.0, 1.0));
    const double scale = std::sqrt(l2_inner(u, u) * l2_inner(v, v));
    worst = std::max(worst, std::abs(direct - spectral) / scale);
    CHECK(l2_inner(u, v) == doctest::Approx(spectral).epsilon(1e-12).scale(scale));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("hs_inner is symmetric and positive definite") {
  const TorusGrid g(64);
  for (int i = 0; i < 50; ++i) {
    const Field u = random_field(g, 100 + i);
    const Field v = random_field(g, 200 + i);
    for (double s : {0.0, 2.0, 3.0}) {
      const SobolevIndex idx(s, 0.7, 1.3);
      const double uv = hs_inner(u, v, idx);
      CHECK(uv == doctest::Approx(hs_inner(v, u, idx)).epsilon(1e-13));
      CHECK(hs_inner(u, u, idx) > 0.0);
    }
  }
}

TEST_CASE("energy_h2 matches the s = 2 inner product and closed forms") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  CHECK(energy_h2(Field::zeros(g), p) == 0.0);
  const Field sx = Field::sample(g, [](double x) { return std::sin(x); });
  CHECK(energy_h2(sx, p) == doctest::Approx(3 * pi).epsilon(1e-14));
  const ModelParams q(1.0, 0.0, 0.4, 2.5, 0.0, Field::zeros(g));
  for (int i = 0; i < 20; ++i) {
    const Field u = random_field(g, 300 + i, 25);
    const double e = energy_h2(u, q);
    CHECK(std::abs(e - hs_inner(u, u, SobolevIndex::of(2.0, q))) <= 1e-12 * e);
  }
}

TEST_CASE("norm equivalence with the standard H2 norm") {
  // m(k) = 1 + b1k² + bk⁴ against (1+k²)²: the ratio lies in [min, max] of
  // m(k)/(1+k²)² over k, which for b = 0.5, b1 = 2 is [0.5, 1].
  const TorusGrid g(64);
  const ModelParams p(1.0, 1.0, 0.5, 2.0, 0.0, Field::zeros(g));
  for (int i = 0; i < 50; ++i) {
    const Field u = random_field(g, 400 + i, 30);
    const double ratio = energy_h2(u, p) / standard_h2(u);
    CHECK(ratio >= 0.5 - 1e-12);
    CHECK(ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("dealiased products are exact for band-limited factors") {
  const TorusGrid g(32);
  const Field a = Field::sample(g, [](double x) { return std::sin(5 * x); });
  const Field b = Field::sample(g, [](double x) { return std::cos(7 * x); });
  // sin5x cos7x = (sin12x − sin2x)/2, both modes below n/2.
  const Field expect = Field::sample(g, [](double x) { return 0.5 * (std::sin(12 * x) - std::sin(2 * x)); });
  CHECK(max_diff(dealiased_product(a, b), expect) <= 1e-14);
  // sin10x·sin10x = (1 − cos20x)/2 aliases on 32 points; dealiasing keeps
  // the mean and removes the out-of-band part.
  const Field c = Field::sample(g, [](double x) { return std::sin(10 * x); });
  CHECK(max_diff(dealiased_product(c, c), Field::constant(g, 0.5)) <= 1e-14);
  CHECK(max_diff(pointwise_product(c, c), Field::constant(g, 0.5)) > 0.1);
}
