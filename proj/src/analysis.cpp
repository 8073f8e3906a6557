#include "torus_stab/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "torus_stab/errors.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/sobolev.hpp"

namespace torus_stab {

DecayFit fit_decay(const SimulationRecord& record, std::optional<std::pair<double, double>> window) {
  if (record.times.empty()) throw FitError("empty record");
  const double T = record.final_time();
  const auto [lo, hi] = window.value_or(std::pair{0.1 * T, 0.9 * T});
  if (!(hi > lo)) throw FitError("fit window must have t_hi > t_lo");
  double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const double t = record.times[i];
    if (t < lo || t > hi) continue;
    const double e = record.energy[i];
    if (!(e > 0.0))
      throw FitError("nonpositive energy " + std::to_string(e) + " at t = " + std::to_string(t));
    const double y = 0.5 * std::log(e);
    pts.emplace_back(t, y);
    n += 1.0;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  if (pts.size() < 2) throw FitError("fewer than two samples in the fit window");
  const double denom = n * stt - st * st;
  if (!(denom > 0.0)) throw FitError("degenerate fit window");
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / n;
  double ss = 0.0;
  for (const auto& [t, y] : pts) {
    const double r = y - (intercept + slope * t);
    ss += r * r;
  }
  const double e0 = record.initial_energy();
  if (!(e0 > 0.0)) throw FitError("initial energy must be positive");
  return {std::exp(intercept) / std::sqrt(e0), -slope, lo, hi, std::sqrt(ss / n),
          static_cast<int>(pts.size())};
}

ObservabilityQuotient observability_quotient(const SimulationRecord& record, double T) {
  if (record.times.empty()) throw ParameterError("empty record");
  if (!(T > 0.0) || T > record.final_time() * (1.0 + 1e-12))
    throw ParameterError("observation time " + std::to_string(T) + " outside the record span");
  const double num = record.initial_energy();
  const double den = record.interpolate(record.damping_integral, T);
  if (!(den > 0.0))
    return {std::numeric_limits<double>::infinity(), num, den, true,
            "damping observation vanishes on [0, T]: no damping or u vanishes on ω"};
  return {num / den, num, den, false, ""};
}

double linearization_gap(const Field& u0, double alpha, double T, const ModelParams& params,
                         std::optional<double> dt) {
  if (!(alpha >= 0.0)) throw ParameterError("alpha must be nonnegative");
  SimConfig cfg(params, u0);
  cfg.t_final = T;
  cfg.dt = dt;
  cfg.snapshot_stride = 1;
  cfg.rhs = RhsKind::ClosedLoop;
  cfg.alpha = alpha;
  const SimulationRecord v = simulate(cfg);
  cfg.rhs = RhsKind::LinearClosedLoop;
  cfg.alpha = 1.0;
  const SimulationRecord w = simulate(cfg);
  double gap = 0.0;
  for (std::size_t i = 0; i < v.snapshots.size(); ++i)
    gap = std::max(gap, std::sqrt(energy_h2(v.snapshots[i] - w.snapshots[i], params)));
  return gap;
}

double energy_semigroup_check(const SimulationRecord& record, double T) {
  if (!(T > 0.0)) throw ParameterError("period T must be positive");
  const auto periods = static_cast<int>(std::floor(record.final_time() / T + 1e-9));
  if (periods < 2) throw ParameterError("record must cover at least two periods");
  const double e0 = record.initial_energy();
  if (!(e0 > 0.0)) return 1.0;
  const double ratio = record.interpolate(record.energy, T) / e0;
  double worst = 0.0;
  for (int k = 1; k <= periods; ++k) {
    const double ek = record.interpolate(record.energy, k * T);
    worst = std::max(worst, ek / (std::pow(ratio, k) * e0));
  }
  return worst;
}

ContractionEstimate linear_contraction(const ModelParams& params, double T,
                                       std::optional<double> dt, int max_iterations, double tol,
                                       std::uint64_t seed) {
  if (!(T > 0.0)) throw ParameterError("period T must be positive");
  if (max_iterations < 1) throw ParameterError("need at least one iteration");
  const TorusGrid& grid = params.grid();
  const double target = dt.value_or(stable_dt(grid, params));
  const auto steps = static_cast<long>(std::ceil(T / target - 1e-9));
  const double h = T / static_cast<double>(steps);

  const Rhs forward = [&](const Field& u) { return linear_closed_loop_rhs(u, params); };
  const Rhs adjoint = [&](const Field& u) {
    Field out = a_apply(u, params);
    out *= -1.0;
    out -= b_apply(pointwise_product(params.sigma(), u), params);
    return out;
  };
  auto flow = [&](Field u, const Rhs& rhs) {
    for (long i = 0; i < steps; ++i) u = rk4_step(u, h, rhs, static_cast<double>(i) * h);
    return u;
  };

  Field v = random_smooth_field(grid, seed, grid.nyquist() - 1, 1.0, params);
  double factor = 0.0;
  double change = 1.0;
  int it = 0;
  while (it < max_iterations) {
    ++it;
    const Field sv = flow(v, forward);
    const double next = energy_h2(sv, params);
    change = std::abs(next - factor) / next;
    factor = next;
    Field w = flow(sv, adjoint);
    w *= 1.0 / std::sqrt(energy_h2(w, params));
    v = std::move(w);
    if (change < tol) break;
  }
  return {std::move(v), factor, it, change};
}

}  // namespace torus_stab
