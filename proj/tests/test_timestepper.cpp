#include "doctest.h"

#include <cmath>

#include "test_util.hpp"
#include "torus_stab/errors.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/sobolev.hpp"
#include "torus_stab/timestepper.hpp"

using namespace torus_stab;
using test_util::max_diff;
using test_util::random_field;

namespace {

// Exact solution of u_t = Au: mode k advances by exp(−iλ(k)t).
Field exact_linear(const Field& u0, const ModelParams& p, double t) {
  Spectrum s = u0.spectrum();
  for (int k = 0; k < static_cast<int>(s.half().size()); ++k)
    s.half()[k] *= std::exp(Complex(0.0, -a_frequency(k, p) * t));
  if (u0.grid().nyquist() > 0) s.half().back() = 0.0;
  return s.to_field();
}

}  // namespace

TEST_CASE("stable_dt from the symbol scan") {
  const TorusGrid g(256);
  const ModelParams p = ModelParams::defaults(g);
  double lam = 0.0;
  for (int k = 0; k <= 128; ++k)
    lam = std::max(lam, std::abs((k - std::pow(k, 3) + std::pow(k, 5)) / (1 + k * k + std::pow(k, 4))));
  CHECK(stable_dt(g, p) == doctest::Approx(2.5 / lam).epsilon(1e-14));

  const TorusGrid g2(512);
  const double ratio = stable_dt(g2, ModelParams::defaults(g2)) / stable_dt(g, p);
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.01));

  const ModelParams bbm(0.0, 0.0, 1.0, 1.0, 0.0, Field::zeros(g));
  CHECK(stable_dt(g, bbm) >= 2.5);
}

TEST_CASE("rk4 with a vanishing right-hand side") {
  const TorusGrid g(32);
  const Field u = random_field(g, 1);
  const Field v = rk4_step(u, 0.1, [&](const Field& f) { return Field::zeros(f.grid()); });
  CHECK(max_diff(u, v) == 0.0);
}

TEST_CASE("rk4 local error is fifth order on the linear flow") {
  const TorusGrid g(32);
  const ModelParams p = ModelParams::defaults(g);
  const Field u0 = random_field(g, 2, 8);
  const Rhs rhs = [&](const Field& f) { return a_apply(f, p); };
  auto local = [&](double dt) { return max_diff(rk4_step(u0, dt, rhs), exact_linear(u0, p, dt)); };
  const double e1 = local(0.02), e2 = local(0.01);
  CHECK(e1 / e2 == doctest::Approx(32.0).epsilon(0.1));
}

TEST_CASE("rk4 global error is fourth order") {
  const TorusGrid g(32);
  const ModelParams p = ModelParams::defaults(g);
  const Field u0 = random_field(g, 3, 8);
  const Rhs rhs = [&](const Field& f) { return a_apply(f, p); };
  const double T = 2.0 * std::numbers::pi;
  auto global = [&](int steps) {
    Field u = u0;
    const double dt = T / steps;
    for (int i = 0; i < steps; ++i) u = rk4_step(u, dt, rhs);
    return max_diff(u, exact_linear(u0, p, T));
  };
  const double ratio = global(200) / global(400);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("rk4 reports non-finite stages with the time") {
  const TorusGrid g(16);
  const Field u = random_field(g, 4);
  const Rhs bad = [](const Field& f) { return Field::constant(f.grid(), std::nan("")); };
  try {
    rk4_step(u, 0.1, bad, 2.5);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.time() == 2.5);
  }
}

TEST_CASE("time reversal of the undamped linear flow") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  const Field u0 = random_field(g, 5, 10);
  const Rhs rhs = [&](const Field& f) { return a_apply(f, p); };
  auto roundtrip = [&](double dt, int steps) {
    Field u = u0;
    for (int i = 0; i < steps; ++i) u = rk4_step(u, dt, rhs);
    for (int i = 0; i < steps; ++i) u = rk4_step(u, -dt, rhs);
    return max_diff(u, u0);
  };
  const double e1 = roundtrip(0.01, 100), e2 = roundtrip(0.005, 200);
  CHECK(e1 <= 1e-6 * u0.max_abs());
  CHECK(e1 / e2 > 12.0);
}

TEST_CASE("simulate: undamped conservation at the conservative gamma") {
  const TorusGrid g(128);
  const ModelParams p = ModelParams::defaults(g).with_sigma(Field::zeros(g));
  SimConfig cfg(p, random_smooth_field(g, 7, 6, 1.0, p));
  cfg.t_final = 1.0;
  cfg.dt = 1e-3;
  cfg.rhs = RhsKind::Undamped;
  const SimulationRecord rec = simulate(cfg);
  CHECK(std::abs(rec.energy.back() - rec.initial_energy()) <= 1e-8 * rec.initial_energy());
  CHECK(rec.max_residual() <= 1e-8);
  CHECK(rec.times.size() == 1001);
  CHECK(rec.final_time() == 1.0);
}

TEST_CASE("simulate: closed loop dissipates and satisfies the energy identity") {
  const TorusGrid g(128);
  const ModelParams p = ModelParams::defaults(g);
  SimConfig cfg(p, random_smooth_field(g, 8, 6, 1.0, p));
  cfg.t_final = 2.0;
  cfg.dt = 1e-3;
  cfg.snapshot_stride = 7;
  const SimulationRecord rec = simulate(cfg);
  CHECK(rec.energy_non_increasing());
  for (std::size_t i = 1; i < rec.energy.size(); ++i)
    if (rec.damping[i] > 0.0) CHECK(rec.energy[i] < rec.energy[i - 1]);
  CHECK(rec.max_residual() <= 1e-6 * rec.initial_energy());
  // First and last states are always stored.
  CHECK(rec.snapshot_times.front() == 0.0);
  CHECK(rec.snapshot_times.back() == rec.final_time());
  CHECK(rec.snapshots.size() == rec.snapshot_times.size());
}

TEST_CASE("simulate: general gamma keeps the identity through the flux term") {
  const TorusGrid g(128);
  const ModelParams p = ModelParams::defaults(g).with_gamma(0.4);
  SimConfig cfg(p, random_smooth_field(g, 9, 6, 1.0, p));
  cfg.t_final = 1.0;
  cfg.dt = 1e-3;
  const SimulationRecord rec = simulate(cfg);
  CHECK(rec.max_residual() <= 1e-6 * rec.initial_energy());
  CHECK(std::abs(rec.flux_integral.back()) > 0.0);
}

TEST_CASE("simulate: frozen Remark coefficients translate the initial state") {
  const TorusGrid g(256);
  const ModelParams p(2.0, 1.0, 1.5, 1.0, 0.0, Field::zeros(g));
  const Field u0 = random_smooth_field(g, 10, 6, 1.0, p);
  SimConfig cfg(p, u0);
  cfg.rhs = RhsKind::Frozen;
  cfg.frozen = FrozenCoefficients::pure_transport(p);
  const double c = p.a() / p.b();
  cfg.t_final = std::numbers::pi / c;
  cfg.dt = 1e-3;
  const SimulationRecord rec = simulate(cfg);
  // Shift by ct = π: u0(x − π).
  const Field expect = Field::sample(g, [&](double x) {
    double v = 0.0;
    const Spectrum s = u0.spectrum();
    for (int k = 0; k <= 6; ++k) {
      const Complex e = s.half()[k] * std::exp(Complex(0, k * (x - std::numbers::pi)));
      v += (k == 0 ? 1.0 : 2.0) * e.real();
    }
    return v;
  });
  CHECK(max_diff(rec.snapshots.back(), expect) <= 1e-6);
  CHECK(std::isnan(rec.residual.back()));
  CHECK(std::isnan(rec.max_residual()));
}

TEST_CASE("auto dt is stability-limited: RK4 damping shows in the identity") {
  // At CFL 2.5 the RK4 amplification factor of the top modes is about 0.5,
  // so the energy identity residual is visibly larger than at dt = 1e-3.
  const TorusGrid g(128);
  const ModelParams p = ModelParams::defaults(g);
  SimConfig cfg(p, random_smooth_field(g, 8, 6, 1.0, p));
  cfg.t_final = 2.0;
  const double auto_residual = simulate(cfg).max_residual();
  cfg.dt = 1e-3;
  const double fine_residual = simulate(cfg).max_residual();
  CHECK(fine_residual < 1e-3 * auto_residual);
}

TEST_CASE("simulate is deterministic") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  SimConfig cfg(p, random_smooth_field(g, 11, 6, 1.0, p));
  cfg.t_final = 0.5;
  const SimulationRecord a = simulate(cfg), b = simulate(cfg);
  CHECK(a.energy == b.energy);
  CHECK(a.damping_integral == b.damping_integral);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    CHECK(max_diff(a.snapshots[i], b.snapshots[i]) == 0.0);
}

TEST_CASE("simulate: divergence guard keeps the partial record") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  SimConfig cfg(p, random_smooth_field(g, 12, 20, 1.0, p));
  cfg.rhs = RhsKind::LinearClosedLoop;
  cfg.dt = 3.0 * stable_dt(g, p);
  cfg.t_final = 2000 * *cfg.dt;
  try {
    simulate(cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    REQUIRE(e.partial());
    CHECK(e.partial()->times.size() >= 2);
    CHECK(e.time() > 0.0);
    CHECK(e.partial()->energy.back() <= 1e12 * e.partial()->initial_energy());
  }
}

TEST_CASE("config validation") {
  const TorusGrid g(32);
  const ModelParams p = ModelParams::defaults(g);
  SimConfig cfg(p, Field::zeros(g));
  cfg.t_final = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.t_final = 1.0;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt.reset();
  cfg.snapshot_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.snapshot_stride = 1;
  cfg.rhs = RhsKind::Frozen;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  SimConfig other(p, Field::zeros(TorusGrid(64)));
  CHECK_THROWS_AS(other.validate(), IncompatibleGridError);
}

TEST_CASE("rhs selector names and initial profiles") {
  for (auto k : {RhsKind::ClosedLoop, RhsKind::LinearClosedLoop, RhsKind::Frozen, RhsKind::Undamped})
    CHECK(parse_rhs_kind(to_string(k)) == k);
  CHECK_FALSE(parse_rhs_kind("explicit").has_value());

  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  InitialProfile prof;
  prof.norm = 2.0;
  CHECK(energy_h2(make_initial(g, prof, p), p) == doctest::Approx(4.0));
  prof.name = "sine";
  prof.mode = 3;
  prof.amplitude = 0.5;
  CHECK(make_initial(g, prof, p).max_abs() == doctest::Approx(0.5));
  prof.name = "samples";
  prof.samples.assign(10, 1.0);
  CHECK_THROWS_AS(make_initial(g, prof, p), ConfigError);
  prof.name = "nonsense";
  CHECK_THROWS_AS(make_initial(g, prof, p), ConfigError);
}

TEST_CASE("record interpolation") {
  SimulationRecord r;
  r.times = {0.0, 1.0, 2.0};
  r.energy = {4.0, 2.0, 1.0};
  CHECK(r.interpolate(r.energy, 0.5) == 3.0);
  CHECK(r.interpolate(r.energy, 5.0) == 1.0);
  CHECK(r.energy_non_increasing());
  CHECK_THROWS_AS(r.interpolate({1.0}, 0.5), ParameterError);
}
