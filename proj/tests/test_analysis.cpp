#include "doctest.h"

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "torus_stab/analysis.hpp"
#include "torus_stab/errors.hpp"
#include "torus_stab/sobolev.hpp"

using namespace torus_stab;
constexpr double pi = std::numbers::pi;

namespace {

SimulationRecord synthetic(double T, int steps, const std::function<double(double)>& energy) {
  SimulationRecord r;
  for (int i = 0; i <= steps; ++i) {
    const double t = T * i / steps;
    r.times.push_back(t);
    r.energy.push_back(energy(t));
    r.damping.push_back(0.0);
    r.damping_integral.push_back(0.0);
    r.flux_integral.push_back(0.0);
    r.residual.push_back(0.0);
  }
  r.dt = T / steps;
  return r;
}

SimulationRecord run(const ModelParams& p, const Field& u0, double T, RhsKind kind) {
  SimConfig cfg(p, u0);
  cfg.t_final = T;
  cfg.dt = 1e-3;
  cfg.rhs = kind;
  return simulate(cfg);
}

}  // namespace

TEST_CASE("fit_decay recovers a synthetic exponential") {
  const SimulationRecord r = synthetic(10.0, 1000, [](double t) { return 4.0 * std::exp(-0.6 * t); });
  const DecayFit f = fit_decay(r);
  CHECK(f.beta == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(f.C == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.residual <= 1e-12);
  CHECK(f.t_lo == doctest::Approx(1.0));
  CHECK(f.t_hi == doctest::Approx(9.0));
  CHECK(f.samples == 801);

  const SimulationRecord shifted = synthetic(10.0, 1000, [](double t) {
    return t < 1.0 ? 4.0 : 9.0 * 4.0 * std::exp(-0.6 * t);
  });
  const DecayFit g = fit_decay(shifted, std::pair{2.0, 8.0});
  CHECK(g.beta == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(g.C == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("fit_decay errors") {
  const SimulationRecord zero = synthetic(1.0, 10, [](double t) { return t > 0.5 ? 0.0 : 1.0; });
  CHECK_THROWS_AS(fit_decay(zero), FitError);
  const SimulationRecord r = synthetic(1.0, 10, [](double) { return 1.0; });
  CHECK_THROWS_AS(fit_decay(r, std::pair{0.51, 0.55}), FitError);
  CHECK_THROWS_AS(fit_decay(r, std::pair{0.5, 0.5}), FitError);
  CHECK(fit_decay(r).beta == doctest::Approx(0.0));
}

TEST_CASE("undamped conservative flow has no decay") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g).with_sigma(Field::zeros(g));
  const Field u0 = random_smooth_field(g, 4, 6, 0.5, p);
  const SimulationRecord r = run(p, u0, 3.0, RhsKind::ClosedLoop);
  CHECK(std::abs(fit_decay(r).beta) <= 1e-9);
  const ObservabilityQuotient q = observability_quotient(r, 3.0);
  CHECK(q.infinite);
  CHECK(std::isinf(q.value));
  CHECK_FALSE(q.diagnostic.empty());
}

TEST_CASE("observability quotient") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  const Field u0 = random_smooth_field(g, 8, 6, 1.0, p);
  const double T = 1.2 * 2 * pi * p.b() / p.a();
  const SimulationRecord r = run(p, u0, T, RhsKind::LinearClosedLoop);
  const ObservabilityQuotient q = observability_quotient(r, T);
  CHECK_FALSE(q.infinite);
  CHECK(q.numerator == r.initial_energy());
  CHECK(q.value == doctest::Approx(q.numerator / q.denominator));
  CHECK(q.value > 0.5);  // E(0) ≥ E(0) − E(T) = 2∫D

  SUBCASE("linear flow is scale invariant") {
    const SimulationRecord r3 = run(p, 3.0 * u0, T, RhsKind::LinearClosedLoop);
    CHECK(observability_quotient(r3, T).value == doctest::Approx(q.value).epsilon(1e-10));
  }
  SUBCASE("T outside the record") {
    CHECK_THROWS_AS(observability_quotient(r, 2 * T), ParameterError);
    CHECK_THROWS_AS(observability_quotient(r, 0.0), ParameterError);
  }
}

TEST_CASE("linearization gap") {
  const TorusGrid g(64);
  const ModelParams p = ModelParams::defaults(g);
  const Field u0 = random_smooth_field(g, 2, 6, 1.0, p);
  const double T = 1.0;
  CHECK(linearization_gap(u0, 0.0, T, p, 1e-3) <= 1e-13);
  const double g1 = linearization_gap(u0, 0.2, T, p, 1e-3);
  const double g2 = linearization_gap(u0, 0.1, T, p, 1e-3);
  const double g3 = linearization_gap(u0, 0.05, T, p, 1e-3);
  CHECK(g1 > g2);
  CHECK(g2 > g3);
  CHECK(g3 > 0.0);
  CHECK(g2 / g3 == doctest::Approx(2.0).epsilon(0.1));
  CHECK_THROWS_AS(linearization_gap(u0, -1.0, T, p, 1e-3), ParameterError);
}

TEST_CASE("semigroup check on synthetic records") {
  const SimulationRecord geo = synthetic(5.0, 500, [](double t) { return std::pow(0.7, t); });
  CHECK(energy_semigroup_check(geo, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  const SimulationRecord flat = synthetic(5.0, 500, [](double) { return 2.0; });
  CHECK(energy_semigroup_check(flat, 1.0) == 1.0);
  // Fast decay in the first period only breaks chaining.
  const SimulationRecord kink = synthetic(5.0, 500, [](double t) { return t < 1.0 ? 1.0 - 0.5 * t : 0.5; });
  CHECK(energy_semigroup_check(kink, 1.0) == doctest::Approx(16.0));
  CHECK_THROWS_AS(energy_semigroup_check(geo, 3.0), ParameterError);
  CHECK_THROWS_AS(energy_semigroup_check(geo, 0.0), ParameterError);
}

TEST_CASE("linear contraction is the top singular value of S(T)") {
  const TorusGrid g(32);
  const ModelParams p = ModelParams::defaults(g);
  const double T = 1.2 * 2 * pi;
  const ContractionEstimate c = linear_contraction(p, T, 1e-3, 40, 1e-10);
  CHECK(c.factor < 1.0);
  CHECK(c.factor > 0.0);
  CHECK(c.change < 1e-2);
  CHECK(energy_h2(c.state, p) == doctest::Approx(1.0).epsilon(1e-12));

  // Power iteration only raises the Rayleigh quotient: the flow from the
  // returned state reaches at least `factor`, and random unit-energy starts
  // stay below it.
  const SimulationRecord r = run(p, c.state, T, RhsKind::LinearClosedLoop);
  CHECK(r.energy.back() >= c.factor * (1 - 1e-12));
  CHECK(r.energy.back() <= c.factor * (1 + 10 * c.change));
  for (std::uint64_t seed : {11, 12, 13}) {
    const Field u = random_smooth_field(g, seed, 10, 1.0, p);
    const SimulationRecord ru = run(p, u, T, RhsKind::LinearClosedLoop);
    CHECK(ru.energy.back() <= c.factor);
  }
  CHECK_THROWS_AS(linear_contraction(p, 0.0), ParameterError);
}
