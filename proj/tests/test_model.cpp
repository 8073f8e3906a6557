#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "torus_stab/carleman.hpp"
#include "torus_stab/errors.hpp"
#include "torus_stab/model.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/sobolev.hpp"

using namespace torus_stab;
using test_util::max_diff;
using test_util::random_field;

namespace {

Field smooth_random(const TorusGrid& g, std::uint64_t seed, double amp = 0.5) {
  return amp * random_field(g, seed, 10);
}

}  // namespace

TEST_CASE("nonlinear terms vanish on zero and constant fields") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g).with_gamma(0.3);
  CHECK(nonlinear_physical(Field::zeros(g), p).max_abs() == 0.0);
  CHECK(nonlinear_physical(Field::constant(g, 1.7), p).max_abs() <= 1e-14);
  CHECK(quasilinear_physical(Field::zeros(g), p).max_abs() == 0.0);
  CHECK(nonlinear_physical_scaled(smooth_random(g, 1), p, 0.0).max_abs() == 0.0);
}

TEST_CASE("integration by parts: (u, N(u)) = (7/48 - gamma) int u_x^3") {
  const TorusGrid g(128);
  for (double gamma : {0.0, kConservativeGamma, 0.4, -0.2}) {
    const ModelParams p = ModelParams::defaults(g).with_gamma(gamma);
    for (int i = 0; i < 10; ++i) {
      const Field u = smooth_random(g, 10 + i);
      const double lhs = l2_inner(u, nonlinear_physical(u, p));
      const double flux = cubic_flux(u);
      const double scale = std::abs(flux) + l2_inner(derivative(u, 1), derivative(u, 1));
      CHECK(std::abs(lhs - (kConservativeGamma - gamma) * flux) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("cubic flux is exact for band-limited fields") {
  // u = sin x + sin 2x: ∫u_x³ = 6∫cos²x cos 2x = 3π.
  const TorusGrid g(16);
  const Field u = Field::sample(g, [](double x) { return std::sin(x) + std::sin(2 * x); });
  CHECK(cubic_flux(u) == doctest::Approx(3 * std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("conservative and quasilinear forms agree") {
  const TorusGrid g(128);
  const ModelParams p(1.0, 0.6, 1.0, 1.0, 0.21, make_bump(g, {}));
  for (int i = 0; i < 100; ++i) {
    const Field u = smooth_random(g, 100 + i);
    const Field lhs = quasilinear_physical(u, p) - derivative(u, 1) - p.a1() * derivative(u, 3);
    const Field rhs = nonlinear_physical(u, p);
    CHECK(max_diff(lhs, rhs) <= 1e-10 * std::max(1.0, rhs.max_abs()));
  }
}

TEST_CASE("quasilinear form on sin x with gamma = a1 = 0") {
  const TorusGrid g(64);
  const ModelParams p(1.0, 0.0, 1.0, 1.0, 0.0, Field::zeros(g));
  const Field u = Field::sample(g, [](double x) { return std::sin(x); });
  const Field expect = Field::sample(g, [](double x) {
    const double s = std::sin(x), c = std::cos(x);
    return (1 + 1.5 * s - 0.375 * s * s) * c + 7.0 / 24.0 * s * c;
  });
  CHECK(max_diff(quasilinear_physical(u, p), expect) <= 1e-11);
}

TEST_CASE("closed loop energy derivative") {
  const TorusGrid g(128);
  const SobolevIndex h2(2.0, 1.0, 1.0);
  SUBCASE("zero state") {
    const ModelParams p = ModelParams::defaults(g).with_sigma(Field::zeros(g));
    CHECK(closed_loop_rhs(Field::zeros(g), p).max_abs() == 0.0);
  }
  SUBCASE("sigma = 0: only the cubic flux survives") {
    for (double gamma : {kConservativeGamma, 0.0, 0.3}) {
      const ModelParams p = ModelParams::defaults(g).with_sigma(Field::zeros(g)).with_gamma(gamma);
      for (int i = 0; i < 10; ++i) {
        const Field u = smooth_random(g, 200 + i);
        const double dE = 2.0 * hs_inner(closed_loop_rhs(u, p), u, h2);
        const double expect = -2.0 * (kConservativeGamma - gamma) * cubic_flux(u);
        const double norm = std::sqrt(energy_h2(u, p));
        CHECK(std::abs(dE - expect) <= 1e-9 * std::max(1.0, norm * norm * norm));
      }
    }
  }
  SUBCASE("damping contributes -2 ||sigma u||^2") {
    const ModelParams p = ModelParams::defaults(g);
    for (int i = 0; i < 10; ++i) {
      const Field u = smooth_random(g, 300 + i);
      const double dE = 2.0 * hs_inner(closed_loop_rhs(u, p), u, h2);
      const double damping = energy_h2(pointwise_product(p.sigma(), u), p);
      CHECK(std::abs(dE + 2.0 * damping) <= 1e-9 * std::max(1.0, energy_h2(u, p)));
    }
  }
}

TEST_CASE("linear closed loop and undamped right-hand sides") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  const Field u = smooth_random(g, 7);
  const Field lin = a_apply(u, p) - b_apply(pointwise_product(p.sigma(), u), p);
  CHECK(max_diff(linear_closed_loop_rhs(u, p), lin) <= 1e-13 * lin.max_abs());
  const Field und = a_apply(u, p) - m_power(nonlinear_physical(u, p), -1.0, p);
  CHECK(max_diff(undamped_rhs(u, p), und) <= 1e-13 * und.max_abs());
  CHECK(max_diff(closed_loop_rhs_scaled(u, p, 1.0), closed_loop_rhs(u, p)) <= 1e-14 * und.max_abs());
  CHECK(max_diff(closed_loop_rhs_scaled(u, p, 0.0), lin) <= 1e-13 * lin.max_abs());
}

TEST_CASE("frozen right-hand side") {
  const TorusGrid g(64);
  const ModelParams p(1.3, 0.4, 0.8, 1.5, 0.1, Field::zeros(g));
  SUBCASE("zero field") {
    CHECK(frozen_rhs(Field::zeros(g), FrozenCoefficients::constant(g, 1, 2, 3), p).max_abs() == 0.0);
  }
  SUBCASE("constant coefficients against the symbol") {
    const double q = 0.7, pp = -0.3, r = 0.25;
    const Field u = Field::sample(g, [](double x) { return std::cos(3 * x); });
    const double m3 = p.m_symbol(3);
    const Field expect = Field::sample(g, [&](double x) {
      const double s = std::sin(3 * x), c = std::cos(3 * x);
      return -(p.a() * -243 * s + q * -3 * s + pp * 27 * s + r * -9 * c) / m3;
    });
    const Field got = frozen_rhs(u, FrozenCoefficients::constant(g, q, pp, r), p);
    CHECK(max_diff(got, expect) <= 1e-12 * expect.max_abs());
  }
  SUBCASE("Remark coefficients reduce to pure transport") {
    const Field u = smooth_random(g, 17);
    const Field got = frozen_rhs(u, FrozenCoefficients::pure_transport(p), p);
    const Field expect = -(p.a() / p.b()) * derivative(u, 1);
    CHECK(max_diff(got, expect) <= 1e-12 * expect.max_abs());
  }
  SUBCASE("coefficients frozen at the state reproduce the undamped flow") {
    const ModelParams q = ModelParams::defaults(g).with_sigma(Field::zeros(g)).with_gamma(0.2);
    const Field u = smooth_random(g, 19);
    const Field frozen = frozen_rhs(u, FrozenCoefficients::from_state(u, q), q);
    const Field direct = undamped_rhs(u, q);
    CHECK(max_diff(frozen, direct) <= 1e-10 * direct.max_abs());
  }
  SUBCASE("non-finite coefficients are rejected") {
    FrozenCoefficients c = FrozenCoefficients::constant(g, 1, 1, 1);
    c.q[3] = std::nan("");
    CHECK_THROWS_AS(c.validate(), ParameterError);
  }
}

TEST_CASE("elliptic split") {
  const TorusGrid g(8);
  const ModelParams p = ModelParams::defaults(g);
  CHECK(split_elliptic(Field::zeros(g), p).max_abs() == 0.0);
  const Field sx = Field::sample(g, [](double x) { return std::sin(x); });
  CHECK(max_diff(split_elliptic(sx, p), 3.0 * sx) <= 1e-13);
  const Field u = 0.5 * random_field(g, 23, 3);
  CHECK(max_diff(m_power(split_elliptic(u, p), -1.0, p), u) <= 1e-13 * u.max_abs());
}

TEST_CASE("transport source") {
  const TorusGrid g(64);
  const ModelParams p(1.3, 0.4, 0.8, 1.5, 0.1, make_bump(g, {}));
  const Field u = smooth_random(g, 29);
  CHECK(transport_source(u, FrozenCoefficients::pure_transport(p), p).max_abs() <= 1e-12 * u.max_abs());
  CHECK(transport_source(Field::zeros(g), FrozenCoefficients::from_state(u, p), p).max_abs() == 0.0);

  // Instantaneous identity: M u_t + (a/b) M u_x equals the source when u_t
  // is the frozen right-hand side.
  const FrozenCoefficients c = FrozenCoefficients::from_state(u, p);
  const Field lhs = split_elliptic(frozen_rhs(u, c, p), p) + (p.a() / p.b()) * derivative(split_elliptic(u, p), 1);
  const Field src = transport_source(u, c, p);
  CHECK(max_diff(lhs, src) <= 1e-10 * src.max_abs());
}

TEST_CASE("transport source along a frozen trajectory, second order in dt") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g).with_sigma(Field::zeros(g));
  const Field u0 = 0.3 * random_field(g, 31, 3);
  const FrozenCoefficients c = FrozenCoefficients::from_state(u0, p);
  auto error_at = [&](int snapshots) {
    const FieldSeries tr = frozen_trajectory(p, u0, c, 0.2, snapshots);
    const std::size_t mid = tr.size() / 2;
    const double h = tr.step();
    const Field wt = (1.0 / (2 * h)) * (split_elliptic(tr.fields[mid + 1], p) - split_elliptic(tr.fields[mid - 1], p));
    const Field lhs = wt + (p.a() / p.b()) * derivative(split_elliptic(tr.fields[mid], p), 1);
    const Field src = transport_source(tr.fields[mid], c, p);
    return max_diff(lhs, src) / src.max_abs();
  };
  const double coarse = error_at(21);
  const double fine = error_at(41);
  CHECK(coarse <= 1e-3);
  CHECK(coarse / fine > 3.5);
}
