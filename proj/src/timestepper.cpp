#include "torus_stab/timestepper.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "torus_stab/errors.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/sobolev.hpp"

namespace torus_stab {

const char* to_string(RhsKind kind) noexcept {
  switch (kind) {
    case RhsKind::ClosedLoop: return "closed_loop";
    case RhsKind::LinearClosedLoop: return "linear_closed_loop";
    case RhsKind::Frozen: return "frozen";
    case RhsKind::Undamped: return "undamped";
  }
  return "unknown";
}

std::optional<RhsKind> parse_rhs_kind(std::string_view name) noexcept {
  for (RhsKind k : {RhsKind::ClosedLoop, RhsKind::LinearClosedLoop, RhsKind::Frozen,
                    RhsKind::Undamped})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

Rhs make_rhs(RhsKind kind, const ModelParams& params,
             const std::optional<FrozenCoefficients>& frozen, double alpha) {
  switch (kind) {
    case RhsKind::ClosedLoop:
      if (alpha == 1.0) return [params](const Field& u) { return closed_loop_rhs(u, params); };
      return [params, alpha](const Field& u) { return closed_loop_rhs_scaled(u, params, alpha); };
    case RhsKind::LinearClosedLoop:
      return [params](const Field& u) { return linear_closed_loop_rhs(u, params); };
    case RhsKind::Undamped:
      return [params](const Field& u) { return undamped_rhs(u, params); };
    case RhsKind::Frozen:
      if (!frozen) throw ConfigError("frozen right-hand side needs coefficients q, p, r");
      frozen->validate();
      return [params, c = *frozen](const Field& u) { return frozen_rhs(u, c, params); };
  }
  throw ConfigError("unknown right-hand side");
}

Field random_smooth_field(const TorusGrid& grid, std::uint64_t seed, int modes, double norm,
                          const ModelParams& params) {
  if (modes < 1 || modes >= grid.nyquist())
    throw ConfigError("random profile needs 1 ≤ modes < n/2 (got " + std::to_string(modes) + ")");
  if (!(norm > 0.0)) throw ConfigError("initial norm must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum s = Spectrum::zeros(grid);
  for (int k = 1; k <= modes; ++k) {
    const double decay = std::exp(-std::pow(static_cast<double>(k) / modes, 2));
    const double re = normal(rng);
    const double im = normal(rng);
    s.half()[static_cast<std::size_t>(k)] = decay * Complex{re, im};
  }
  Field u = s.to_field();
  u *= norm / std::sqrt(energy_h2(u, params));
  return u;
}

Field make_initial(const TorusGrid& grid, const InitialProfile& profile,
                   const ModelParams& params) {
  if (profile.name == "random")
    return random_smooth_field(grid, profile.seed, profile.modes, profile.norm, params);
  if (profile.name == "bump") return make_bump(grid, profile.bump);
  if (profile.name == "sine") {
    const int m = profile.mode;
    if (m < 1 || m >= grid.nyquist()) throw ConfigError("sine mode must lie in [1, n/2)");
    return Field::sample(grid, [&](double x) { return profile.amplitude * std::sin(m * x); });
  }
  if (profile.name == "samples") {
    if (static_cast<int>(profile.samples.size()) != grid.size())
      throw ConfigError("initial samples: expected " + std::to_string(grid.size()) +
                        " values, got " + std::to_string(profile.samples.size()));
    return {grid, profile.samples};
  }
  throw ConfigError("unknown initial profile '" + profile.name +
                    "' (expected random, bump, sine or samples)");
}

void SimConfig::validate() const {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("T_final must be positive");
  if (dt && (!(*dt > 0.0) || !std::isfinite(*dt))) throw ConfigError("dt must be positive");
  if (snapshot_stride < 1) throw ConfigError("snapshot stride must be at least 1");
  if (!(blowup_factor > 1.0)) throw ConfigError("blowup factor must exceed 1");
  require_same_grid(initial.grid(), params.grid(), "SimConfig");
  for (double v : initial.values())
    if (!std::isfinite(v)) throw ConfigError("initial data must be finite");
  if (rhs == RhsKind::Frozen) {
    if (!frozen) throw ConfigError("frozen right-hand side needs coefficients q, p, r");
    require_same_grid(frozen->q.grid(), params.grid(), "SimConfig frozen coefficients");
  }
}

double SimulationRecord::max_residual() const {
  double m = 0.0;
  bool any = false;
  for (double r : residual) {
    if (std::isnan(r)) continue;
    m = std::max(m, r);
    any = true;
  }
  return any ? m : std::numeric_limits<double>::quiet_NaN();
}

bool SimulationRecord::energy_non_increasing() const {
  for (std::size_t i = 1; i < energy.size(); ++i)
    if (energy[i] > energy[i - 1]) return false;
  return true;
}

double SimulationRecord::interpolate(const std::vector<double>& series, double t) const {
  if (series.size() != times.size() || times.empty())
    throw ParameterError("series does not match the record's time grid");
  if (t <= times.front()) return series.front();
  if (t >= times.back()) return series.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * series[i - 1] + w * series[i];
}

double stable_dt(const TorusGrid& grid, const ModelParams& params) {
  double lam = 0.0;
  for (int k = 1; k <= grid.nyquist(); ++k) lam = std::max(lam, std::abs(a_frequency(k, params)));
  return kCflConstant / lam;
}

namespace {

void require_finite(const Field& f, double t) {
  for (double v : f.values())
    if (!std::isfinite(v))
      throw DivergenceError("non-finite value in RK4 stage at t = " + std::to_string(t), t);
}

}  // namespace

Field rk4_step(const Field& u, double dt, const Rhs& rhs, double t,
               const StageObserver& observer) {
  if (observer) observer(0, u);
  const Field k1 = rhs(u);
  require_finite(k1, t);
  Field y = u;
  y.axpy(0.5 * dt, k1);
  if (observer) observer(1, y);
  const Field k2 = rhs(y);
  require_finite(k2, t);
  y = u;
  y.axpy(0.5 * dt, k2);
  if (observer) observer(2, y);
  const Field k3 = rhs(y);
  require_finite(k3, t);
  y = u;
  y.axpy(dt, k3);
  if (observer) observer(3, y);
  const Field k4 = rhs(y);
  require_finite(k4, t);
  Field out = u;
  out.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
  return out;
}

SimulationRecord simulate(const SimConfig& cfg) {
  cfg.validate();
  const ModelParams& params = cfg.params;
  const Rhs rhs = make_rhs(cfg.rhs, params, cfg.frozen, cfg.alpha);

  const double dt_target = cfg.dt.value_or(stable_dt(params.grid(), params));
  const auto steps = static_cast<long>(std::ceil(cfg.t_final / dt_target - 1e-9));
  const double dt = cfg.t_final / static_cast<double>(steps);

  const bool damped = cfg.rhs == RhsKind::ClosedLoop || cfg.rhs == RhsKind::LinearClosedLoop ||
                      cfg.rhs == RhsKind::Frozen;
  double flux_coeff = 0.0;
  if (cfg.rhs == RhsKind::ClosedLoop) flux_coeff = cfg.alpha * (kConservativeGamma - params.gamma());
  if (cfg.rhs == RhsKind::Undamped) flux_coeff = kConservativeGamma - params.gamma();
  const bool has_identity = cfg.rhs != RhsKind::Frozen;

  auto damping_of = [&](const Field& u) {
    return damped ? energy_h2(pointwise_product(params.sigma(), u), params) : 0.0;
  };
  auto flux_of = [&](const Field& u) { return flux_coeff != 0.0 ? cubic_flux(u) : 0.0; };

  SimulationRecord rec;
  rec.rhs = cfg.rhs;
  rec.gamma = params.gamma();
  rec.alpha = cfg.alpha;
  rec.dt = dt;

  Field u = cfg.initial;
  double q = 0.0;
  double j = 0.0;
  const double e0 = energy_h2(u, params);
  auto push = [&](double t, const Field& state, double energy, long step) {
    rec.times.push_back(t);
    rec.energy.push_back(energy);
    rec.damping.push_back(damping_of(state));
    rec.damping_integral.push_back(q);
    rec.flux_integral.push_back(j);
    rec.residual.push_back(has_identity
                               ? std::abs(energy - e0 + 2.0 * q + 2.0 * flux_coeff * j)
                               : std::numeric_limits<double>::quiet_NaN());
    if (step % cfg.snapshot_stride == 0 || step == steps) {
      rec.snapshot_times.push_back(t);
      rec.snapshots.push_back(state);
    }
  };
  push(0.0, u, e0, 0);

  const double limit = cfg.blowup_factor * cfg.blowup_factor * e0;
  std::array<double, 4> dq{};
  std::array<double, 4> dj{};
  const StageObserver observer = [&](int stage, const Field& y) {
    dq[static_cast<std::size_t>(stage)] = damping_of(y);
    dj[static_cast<std::size_t>(stage)] = flux_of(y);
  };

  for (long step = 1; step <= steps; ++step) {
    const double t0 = static_cast<double>(step - 1) * dt;
    try {
      u = rk4_step(u, dt, rhs, t0, observer);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), e.time(), std::make_shared<SimulationRecord>(rec));
    }
    q += dt / 6.0 * (dq[0] + 2.0 * dq[1] + 2.0 * dq[2] + dq[3]);
    j += dt / 6.0 * (dj[0] + 2.0 * dj[1] + 2.0 * dj[2] + dj[3]);
    const double t = step == steps ? cfg.t_final : static_cast<double>(step) * dt;
    const double e = energy_h2(u, params);
    if (!std::isfinite(e) || (e0 > 0.0 && e > limit))
      throw DivergenceError("H² norm exceeded " + std::to_string(cfg.blowup_factor) +
                                " times its initial value at t = " + std::to_string(t),
                            t, std::make_shared<SimulationRecord>(rec));
    push(t, u, e, step);
  }
  return rec;
}

}  // namespace torus_stab
