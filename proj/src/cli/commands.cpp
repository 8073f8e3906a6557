#include "torus_stab/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "torus_stab/analysis.hpp"
#include "torus_stab/carleman.hpp"
#include "torus_stab/cli/run_store.hpp"
#include "torus_stab/cli/svg.hpp"
#include "torus_stab/errors.hpp"
#include "torus_stab/model.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/sobolev.hpp"

namespace torus_stab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

RunConfig load_config(const CommonOptions& opts, bool required) {
  if (!opts.config) {
    if (required) throw ConfigError("--config is required");
    return {};
  }
  RunConfig cfg = parse_config_file(*opts.config);
  if (opts.seed) cfg.initial.seed = *opts.seed;
  return cfg;
}

// Maps the error taxonomy onto exit codes and prints one line to stderr.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const BoundViolationError& e) {
    std::cerr << "bound violation: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  }
}

// Claims `dir` for a new run: refuses an existing manifest unless forced.
void claim_directory(const fs::path& dir, bool force) {
  if (fs::exists(dir / "manifest.json") && !force)
    throw ConfigError("run directory '" + dir.string() +
                      "' already holds a manifest; pass --force to overwrite");
  if (fs::exists(dir)) fs::remove_all(dir);
  fs::create_directories(dir);
}

json run_summary(const SimulationRecord& rec) {
  json s;
  s["dt"] = rec.dt;
  s["steps"] = rec.times.size() - 1;
  s["final_time"] = rec.final_time();
  s["E0"] = rec.initial_energy();
  s["E_final"] = rec.energy.back();
  s["max_residual"] = number_or_null(rec.max_residual());
  s["max_residual_rel"] = number_or_null(rec.max_residual() / rec.initial_energy());
  s["energy_non_increasing"] = rec.energy_non_increasing();
  try {
    const DecayFit fit = fit_decay(rec);
    s["beta"] = fit.beta;
    s["C"] = fit.C;
    s["fit_residual"] = fit.residual;
    s["fit_window"] = {fit.t_lo, fit.t_hi};
  } catch (const std::exception& e) {
    s["beta"] = nullptr;
    s["fit_error"] = e.what();
  }
  const ObservabilityQuotient q = observability_quotient(rec, rec.final_time());
  s["theta"] = number_or_null(q.value);
  s["theta_infinite"] = q.infinite;
  if (!q.diagnostic.empty()) s["theta_diagnostic"] = q.diagnostic;
  return s;
}

void persist_record(const fs::path& dir, const SimulationRecord& rec) {
  write_energy_csv(dir / "energy.csv", rec);
  write_snapshots(dir / "snapshots.bin", rec.snapshot_times, rec.snapshots);
}

// ---- verify suites -------------------------------------------------------

struct Table {
  std::string csv;
  explicit Table(const std::string& header) : csv(header + "\n") {}
  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) csv += ",";
      csv += c;
      first = false;
    }
    csv += "\n";
  }
};

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

CarlemanWeight weight_from(const RunConfig& cfg) {
  return build_psi(cfg.carleman.eta, cfg.carleman.delta, cfg.carleman.n_fine,
                   cfg.carleman.seam_slope);
}

double admissible_horizon(const RunConfig& cfg) {
  return 1.1 * (kTwoPi + cfg.carleman.delta) * cfg.b / (cfg.carleman.rho * cfg.a);
}

VerifyReport suite_adjoint(const RunConfig& cfg, std::uint64_t seed) {
  const ModelParams params = cfg.model_params();
  const TorusGrid grid = params.grid();
  const int modes = std::min(32, grid.nyquist() - 1);
  VerifyReport r{"adjoint", "", {}, json::object(), true};
  Table t("check,s,value,bound,pass");

  for (double s : {2.0, 3.0, 4.0}) {
    const SobolevIndex idx = SobolevIndex::of(s, params);
    double worst_b = 0.0, worst_a = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Field phi = random_smooth_field(grid, seed + 2 * i, modes, 1.0, params);
      const Field psi = random_smooth_field(grid, seed + 2 * i + 1, modes, 1.0, params);
      const Field bphi = b_apply(phi, params);
      const Field bspsi = b_star_apply(psi, s, params);
      const double lhs = hs_inner(bphi, psi, idx);
      const double rhs = hs_inner(phi, bspsi, idx);
      const double scale = std::sqrt(hs_inner(bphi, bphi, idx) * hs_inner(psi, psi, idx));
      worst_b = std::max(worst_b, std::abs(lhs - rhs) / scale);
      const double skew = hs_inner(a_apply(phi, params), phi, idx);
      worst_a = std::max(worst_a, std::abs(skew) / hs_inner(phi, phi, idx));
    }
    const bool ok_b = worst_b <= 1e-10;
    const bool ok_a = worst_a <= 1e-12;
    t.row({"B_adjoint_rel_defect", g6(s), g17(worst_b), "1e-10", verdict(ok_b)});
    t.row({"A_skew_rel", g6(s), g17(worst_a), "1e-12", verdict(ok_a)});
    r.summary.push_back(std::string(verdict(ok_b)) + " adjoint defect s=" + g6(s) + ": " + g6(worst_b));
    r.summary.push_back(std::string(verdict(ok_a)) + " A skew s=" + g6(s) + ": " + g6(worst_a));
    r.constants["adjoint_defect_s" + g6(s)] = worst_b;
    r.constants["skew_defect_s" + g6(s)] = worst_a;
    r.passed = r.passed && ok_b && ok_a;
  }

  double worst_sigma = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Field f = random_smooth_field(grid, seed + 1000 + i, modes, 1.0, params);
    const Field d = b_star_apply(f, 2.0, params) - pointwise_product(params.sigma(), f);
    worst_sigma = std::max(worst_sigma, d.max_abs());
  }
  const bool ok = worst_sigma <= 1e-12;
  t.row({"Bstar2_minus_sigma", "2", g17(worst_sigma), "1e-12", verdict(ok)});
  r.summary.push_back(std::string(verdict(ok)) + " B*2 f - sigma f: " + g6(worst_sigma));
  r.constants["bstar2_pointwise"] = worst_sigma;
  r.passed = r.passed && ok;
  r.csv = t.csv;
  return r;
}

VerifyReport suite_identity(const RunConfig& cfg, std::uint64_t seed) {
  const TorusGrid grid = cfg.grid();
  const CarlemanWeight w = weight_from(cfg);
  VerifyReport r{"identity", "", {}, json::object(), true};
  Table t("check,s,value,bound,pass");
  double worst = 0.0;
  for (double s : {5.0, 10.0, 20.0}) {
    double worst_s = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Field v = seam_avoiding_field(grid, w.eta(), seed + i);
      worst_s = std::max(worst_s, conjugation_defect(v, w, s).relative());
    }
    const bool ok = worst_s <= 1e-8;
    t.row({"conjugation_identity_rel", g6(s), g17(worst_s), "1e-8", verdict(ok)});
    r.summary.push_back(std::string(verdict(ok)) + " conjugation identity s=" + g6(s) + ": " +
                        g6(worst_s));
    worst = std::max(worst, worst_s);
    r.passed = r.passed && ok;

    const auto h = h_coeffs(w, s, grid);
    const Field psi2 = w.sample(grid, 2);
    double h4 = 0.0;
    for (int j = 0; j < grid.size(); ++j)
      h4 = std::max(h4, std::abs(h[3][j] - 8.0 * s * psi2[j]) / (8.0 * s * std::abs(psi2[j]) + 1e-300));
    const bool ok4 = h4 <= 1e-14;
    t.row({"h4_minus_8s_psi_xx_rel", g6(s), g17(h4), "1e-14", verdict(ok4)});
    r.summary.push_back(std::string(verdict(ok4)) + " h4 = 8 s psi_xx s=" + g6(s) + ": " + g6(h4));
    r.passed = r.passed && ok4;
  }
  r.constants["max_relative_defect"] = worst;
  r.csv = t.csv;
  return r;
}

VerifyReport suite_elliptic(const RunConfig& cfg, std::uint64_t seed) {
  const TorusGrid grid = cfg.grid();
  const CarlemanWeight w = weight_from(cfg);
  VerifyReport r{"carleman-elliptic", "", {}, json::object(), true};
  Table t("check,s,lhs,rhs,quotient,pass");

  const PositivityReport pos = interior_positivity(w, grid);
  const bool ok_pos = pos.K > 0.0 && std::isfinite(pos.K1);
  r.summary.push_back(std::string(verdict(ok_pos)) + " interior positivity: s0=" + g6(pos.s0) +
                      " K=" + g6(pos.K) + " K1=" + g6(pos.K1));
  r.constants["s0"] = pos.s0;
  r.constants["K"] = pos.K;
  r.constants["K1"] = pos.K1;
  r.constants["min_slope"] = w.min_slope();
  r.constants["max_slope"] = w.max_slope();
  r.passed = ok_pos;

  const Field mask = seam_mask(grid, w.eta());
  double c0 = 0.0;
  bool finite = true;
  std::vector<double> per_s;
  for (int k = 0; k < 5; ++k) {
    const double s = pos.s0 * std::pow(4.0, k / 4.0);
    double worst = 0.0;
    double lhs_w = 0.0, rhs_w = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Field u = seam_avoiding_field(grid, w.eta(), seed + i);
      const CarlemanQuotient q = elliptic_ratio(u, w, s, mask);
      if (!(q.quotient <= worst)) {
        worst = q.quotient;
        lhs_w = q.lhs;
        rhs_w = q.rhs;
      }
    }
    const bool ok = std::isfinite(worst);
    finite = finite && ok;
    c0 = std::max(c0, worst);
    per_s.push_back(worst);
    t.row({"elliptic_max_quotient", g17(s), g17(lhs_w), g17(rhs_w), g17(worst), verdict(ok)});
  }
  bool trend = true;
  for (std::size_t k = 1; k < per_s.size(); ++k) trend = trend && per_s[k] <= per_s[k - 1] * (1 + 1e-12);
  r.summary.push_back(std::string(verdict(finite)) + " elliptic quotient finite on [s0, 4 s0], C0 >= " +
                      g6(c0) + (trend ? " (non-increasing in s)" : " (not monotone in s)"));
  r.constants["C0_lower_bound"] = c0;
  r.constants["elliptic_non_increasing"] = trend;
  r.passed = r.passed && finite;
  r.csv = t.csv;
  return r;
}

VerifyReport suite_transport(const RunConfig& cfg, std::uint64_t seed) {
  const ModelParams params = cfg.model_params();
  const TorusGrid grid = params.grid();
  const CarlemanWeight w = weight_from(cfg);
  const double T = admissible_horizon(cfg);
  const SpaceTimeWeight stw = make_space_time_weight(w, cfg.carleman.rho, cfg.a, cfg.b, T);
  VerifyReport r{"carleman-transport", "", {}, json::object(), true};
  Table t("check,s,lhs,rhs,quotient,pass");

  const TransportSigns signs = transport_signs(stw, grid);
  const bool ok_signs = stw.admissible() && signs.positive() &&
                        signs.interior_min >= signs.interior_constant * (1 - 1e-9);
  r.summary.push_back(std::string(verdict(ok_signs)) + " transport signs at T=" + g6(T) +
                      ": interior " + g6(signs.interior_min) + " (constant " +
                      g6(signs.interior_constant) + "), t=T " + g6(signs.final_min) + ", t=0 " +
                      g6(signs.initial_min));
  r.constants["T"] = T;
  r.constants["interior_min"] = signs.interior_min;
  r.constants["final_min"] = signs.final_min;
  r.constants["initial_min"] = signs.initial_min;
  r.passed = ok_signs;

  const Field u0 = random_smooth_field(grid, seed, 6, 1.0, params);
  const Field mask = params.omega_mask();
  double c1 = 0.0;
  for (const auto& [name, coeffs] :
       {std::pair{std::string("pure_transport"), FrozenCoefficients::pure_transport(params)},
        std::pair{std::string("state"), FrozenCoefficients::from_state(u0, params)}}) {
    const FieldSeries traj = frozen_trajectory(params, u0, coeffs, T, 121);
    FieldSeries wser{traj.times, {}}, src{traj.times, {}};
    for (const Field& u : traj.fields) {
      wser.fields.push_back(split_elliptic(u, params));
      src.fields.push_back(transport_source(u, coeffs, params));
    }
    for (double s : {1.0, 2.0, 4.0}) {
      const CarlemanQuotient q = transport_ratio(wser, stw, s, mask, src);
      const bool ok = std::isfinite(q.quotient);
      c1 = std::max(c1, q.quotient);
      t.row({"transport_" + name, g6(s), g17(q.lhs), g17(q.rhs), g17(q.quotient), verdict(ok)});
      r.passed = r.passed && ok;
    }
  }
  r.summary.push_back(std::string(verdict(std::isfinite(c1))) +
                      " transport quotient finite for s in {1,2,4}, C1 >= " + g6(c1));
  r.constants["C1_lower_bound"] = c1;
  r.csv = t.csv;
  return r;
}

VerifyReport suite_combined(const RunConfig& cfg, std::uint64_t seed) {
  const ModelParams params = cfg.model_params();
  const TorusGrid grid = params.grid();
  const CarlemanWeight w = weight_from(cfg);
  const double T = admissible_horizon(cfg);
  const SpaceTimeWeight stw = make_space_time_weight(w, cfg.carleman.rho, cfg.a, cfg.b, T);
  VerifyReport r{"carleman-combined", "", {}, json::object(), true};
  Table t("check,s,lhs,rhs,quotient,pass");

  const Field u0 = random_smooth_field(grid, seed, 6, 1.0, params);
  const FieldSeries traj =
      frozen_trajectory(params, u0, FrozenCoefficients::pure_transport(params), T, 121);
  const Field mask = params.omega_mask();
  double c2 = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const CarlemanQuotient q = combined_ratio(traj, stw, s, mask, params);
    const bool ok = std::isfinite(q.quotient);
    c2 = std::max(c2, q.quotient);
    t.row({"combined_admissible", g6(s), g17(q.lhs), g17(q.rhs), g17(q.quotient), verdict(ok)});
    r.passed = r.passed && ok;
  }
  r.summary.push_back(std::string(verdict(r.passed)) + " combined quotient finite at T=" + g6(T) +
                      ", C2 >= " + g6(c2));
  r.constants["C2_lower_bound"] = c2;

  // The counterexample needs a finer grid to resolve the narrow bump.
  const TorusGrid fine(std::max(512, grid.size()));
  const ModelParams fine_params(cfg.a, cfg.a1, cfg.b, cfg.b1, cfg.gamma, Field::zeros(fine));
  const SharpnessProbe probe = remark_sharpness_probe(fine_params, 0.5, 0.1, cfg.carleman.rho);
  t.row({"probe_sub_threshold", "0.1", g17(probe.sub.lhs), g17(probe.sub.rhs),
         g17(probe.sub.quotient), verdict(probe.sub.quotient >= 1e6)});
  t.row({"probe_super_threshold", "0.1", g17(probe.super.lhs), g17(probe.super.rhs),
         g17(probe.super.quotient), verdict(std::isfinite(probe.super.quotient))});
  const bool diverges = probe.sub.quotient >= 1e6 && std::isfinite(probe.super.quotient) &&
                        probe.sub.quotient > 1e3 * probe.super.quotient;
  r.summary.push_back(std::string(verdict(diverges)) + " sharpness probe: T_sub=" + g6(probe.t_sub) +
                      " quotient " + g6(probe.sub.quotient) + ", T_super=" + g6(probe.t_super) +
                      " quotient " + g6(probe.super.quotient));
  r.constants["probe_sub_quotient"] = number_or_null(probe.sub.quotient);
  r.constants["probe_super_quotient"] = number_or_null(probe.super.quotient);
  r.passed = r.passed && diverges;
  r.csv = t.csv;
  return r;
}

// ---- sweep ---------------------------------------------------------------

struct SweepPoint {
  double amplitude;
  double width;
  double gamma;
  double speed;
  std::uint64_t seed;
};

struct PointResult {
  std::string status = "pending";
  std::string message;
  double beta = std::nan("");
  double fit_residual = std::nan("");
  double theta = std::nan("");
  bool theta_infinite = false;
  bool undamped = false;
  double e0 = std::nan("");
  double e_final = std::nan("");
  double max_residual = std::nan("");
  std::vector<double> times;
  std::vector<double> energy;
};

template <typename T>
std::vector<T> or_default(const std::vector<T>& v, T fallback) {
  return v.empty() ? std::vector<T>{fallback} : v;
}

PointResult run_point(const RunConfig& base, const SweepPoint& pt, const fs::path& dir) {
  PointResult res;
  RunConfig c = base;
  c.damping.amplitude = pt.amplitude;
  c.damping.width = pt.width;
  c.gamma = pt.gamma;
  c.a = pt.speed * c.b;
  c.initial.seed = pt.seed;
  try {
    const SimConfig sim = c.sim_config();
    res.undamped = !sim.params.is_damped();
    const SimulationRecord rec = simulate(sim);
    fs::create_directories(dir);
    write_energy_csv(dir / "energy.csv", rec);
    res.times = rec.times;
    res.energy = rec.energy;
    res.e0 = rec.initial_energy();
    res.e_final = rec.energy.back();
    res.max_residual = rec.max_residual();
    try {
      const DecayFit fit = fit_decay(rec);
      res.beta = fit.beta;
      res.fit_residual = fit.residual;
    } catch (const FitError& e) {
      res.message = e.what();
    }
    const double t_obs = base.sweep.observe_T.value_or(1.2 * kTwoPi * c.b / c.a);
    if (t_obs <= rec.final_time() * (1 + 1e-12)) {
      const ObservabilityQuotient q = observability_quotient(rec, std::min(t_obs, rec.final_time()));
      res.theta = q.value;
      res.theta_infinite = q.infinite;
    } else {
      res.message += (res.message.empty() ? "" : "; ") + std::string("run shorter than observe_T");
    }
    res.status = "ok";
  } catch (const DivergenceError& e) {
    res.status = "diverged";
    res.message = e.what();
  } catch (const std::exception& e) {
    res.status = "failed";
    res.message = e.what();
  }
  return res;
}

}  // namespace

fs::path output_root(const CommonOptions& opts) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv("TORUS_STAB_OUT"); env && *env) return env;
  return "torus_stab_out";
}

int cmd_simulate(const CommonOptions& opts) {
  return guarded([&] {
    const RunConfig cfg = load_config(opts, true);
    const SimConfig sim = cfg.sim_config();
    const std::string id = cfg.run_id();
    const fs::path dir = output_root(opts) / "runs" / id;
    claim_directory(dir, opts.force);

    json manifest;
    manifest["run_id"] = id;
    manifest["code_version"] = kCodeVersion;
    manifest["config"] = cfg.echo();
    manifest["started"] = utc_timestamp();
    manifest["status"] = "running";
    manifest["complete"] = false;
    write_json_atomic(dir / "manifest.json", manifest);
    spdlog::info("run {} -> {}", id, dir.string());

    int code = kExitOk;
    SimulationRecord rec;
    try {
      rec = simulate(sim);
      manifest["status"] = "complete";
      manifest["complete"] = true;
    } catch (const DivergenceError& e) {
      std::cerr << "divergence: " << e.what() << "\n";
      if (!e.partial()) throw;
      rec = *e.partial();
      manifest["status"] = "diverged";
      manifest["divergence"] = {{"time", e.time()}, {"message", e.what()}};
      code = kExitDivergence;
    }
    persist_record(dir, rec);
    manifest["summary"] = run_summary(rec);
    manifest["artifacts"] = {{"energy", "energy.csv"}, {"snapshots", "snapshots.bin"}};
    manifest["finished"] = utc_timestamp();
    write_json_atomic(dir / "manifest.json", manifest);
    std::cout << id << " " << manifest["status"].get<std::string>() << " " << dir.string() << "\n";
    return code;
  });
}

VerifyReport run_verify_suite(const std::string& suite, const RunConfig& cfg, std::uint64_t seed) {
  if (suite == "adjoint") return suite_adjoint(cfg, seed);
  if (suite == "identity") return suite_identity(cfg, seed);
  if (suite == "carleman-elliptic") return suite_elliptic(cfg, seed);
  if (suite == "carleman-transport") return suite_transport(cfg, seed);
  if (suite == "carleman-combined") return suite_combined(cfg, seed);
  std::string names;
  for (const auto& s : kVerifySuites) names += (names.empty() ? "" : ", ") + s;
  throw ConfigError("unknown verify suite '" + suite + "' (" + names + ")");
}

int cmd_verify(const std::string& suite, const CommonOptions& opts) {
  return guarded([&] {
    const RunConfig cfg = load_config(opts, false);
    const fs::path dir = output_root(opts) / "verify" / suite;
    VerifyReport report;
    try {
      report = run_verify_suite(suite, cfg, opts.seed.value_or(1));
    } catch (const BoundViolationError& e) {
      fs::create_directories(dir);
      const std::string msg = std::string("FAIL weight bounds: ") + e.what() +
                              " (min slope " + g6(e.min_slope()) + ", max slope " +
                              g6(e.max_slope()) + ")";
      write_file_atomic(dir / "summary.txt", msg + "\n");
      std::cerr << "bound violation: " << e.what() << "\n";
      return static_cast<int>(kExitVerify);
    }
    fs::create_directories(dir);
    write_file_atomic(dir / "report.csv", report.csv);
    std::string text;
    for (const auto& line : report.summary) text += line + "\n";
    text += std::string("suite ") + suite + ": " + (report.passed ? "PASS" : "FAIL") + "\n";
    write_file_atomic(dir / "summary.txt", text);
    write_json_atomic(dir / "constants.json", report.constants);
    std::cout << text;
    return report.passed ? static_cast<int>(kExitOk) : static_cast<int>(kExitVerify);
  });
}

int cmd_sweep(const CommonOptions& opts) {
  return guarded([&] {
    const RunConfig cfg = load_config(opts, true);
    if (!cfg.t_final) throw ConfigError("missing field 'time.T_final'");
    if (opts.workers < 1) throw ConfigError("--workers must be at least 1");
    const auto& sw = cfg.sweep;
    std::vector<SweepPoint> points;
    for (double amp : or_default(sw.amplitudes, cfg.damping.amplitude))
      for (double width : or_default(sw.widths, cfg.damping.width))
        for (double gamma : or_default(sw.gammas, cfg.gamma))
          for (double speed : or_default(sw.speeds, cfg.a / cfg.b))
            for (std::uint64_t seed : or_default(sw.seeds, cfg.initial.seed))
              points.push_back({amp, width, gamma, speed, seed});

    const std::string id = cfg.run_id();
    const fs::path dir = output_root(opts) / "sweeps" / id;
    claim_directory(dir, opts.force);
    json manifest;
    manifest["run_id"] = id;
    manifest["code_version"] = kCodeVersion;
    manifest["config"] = cfg.echo();
    manifest["started"] = utc_timestamp();
    manifest["status"] = "running";
    manifest["complete"] = false;
    manifest["points"] = points.size();
    write_json_atomic(dir / "manifest.json", manifest);

    std::vector<PointResult> results(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < points.size(); i = next++) {
        results[i] = run_point(cfg, points[i], dir / "points" / std::to_string(i));
        spdlog::info("sweep point {}/{}: {}", i + 1, points.size(), results[i].status);
      }
    };
    const int nworkers = std::min<int>(opts.workers, static_cast<int>(points.size()));
    std::vector<std::thread> pool;
    for (int k = 0; k < nworkers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::string csv =
        "point,amplitude,width,gamma,speed,seed,status,beta,fit_residual,theta,theta_infinite,"
        "undamped,E0,E_final,max_residual,message\n";
    int diverged = 0, failed = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const auto& r = results[i];
      diverged += r.status == "diverged";
      failed += r.status == "failed";
      std::string msg = r.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv += std::to_string(i) + "," + g17(p.amplitude) + "," + g17(p.width) + "," + g17(p.gamma) +
             "," + g17(p.speed) + "," + std::to_string(p.seed) + "," + r.status + "," +
             g17(r.beta) + "," + g17(r.fit_residual) + "," + g17(r.theta) + "," +
             (r.theta_infinite ? "1" : "0") + "," + (r.undamped ? "1" : "0") + "," + g17(r.e0) +
             "," + g17(r.e_final) + "," + g17(r.max_residual) + ",\"" + msg + "\"\n";
    }
    write_file_atomic(dir / "aggregate.csv", csv);

    std::vector<Series2D> energy_series;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (results[i].times.empty()) continue;
      // Thin long series so the SVG stays small.
      const std::size_t stride = std::max<std::size_t>(1, results[i].times.size() / 400);
      Series2D s{"#" + std::to_string(i) + " amp " + g6(points[i].amplitude), {}, {}};
      for (std::size_t j = 0; j < results[i].times.size(); j += stride) {
        s.x.push_back(results[i].times[j]);
        s.y.push_back(results[i].energy[j]);
      }
      energy_series.push_back(std::move(s));
    }
    write_svg(dir / "energy.svg", {"Energy E(t)", "t", "E", true, false}, energy_series);

    // β against amplitude, one curve per remaining parameter combination.
    std::map<std::tuple<double, double, double, std::uint64_t>, Series2D> groups;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      auto& g = groups[{p.width, p.gamma, p.speed, p.seed}];
      if (g.label.empty())
        g.label = "w " + g6(p.width) + " g " + g6(p.gamma) + " c " + g6(p.speed) + " seed " +
                  std::to_string(p.seed);
      g.x.push_back(p.amplitude);
      g.y.push_back(results[i].beta);
    }
    std::vector<Series2D> beta_series;
    bool trend = true;
    for (auto& [key, g] : groups) {
      std::vector<std::size_t> order(g.x.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::sort(order.begin(), order.end(), [&](auto l, auto r) { return g.x[l] < g.x[r]; });
      Series2D sorted{g.label, {}, {}};
      for (auto k : order) {
        sorted.x.push_back(g.x[k]);
        sorted.y.push_back(g.y[k]);
      }
      for (std::size_t k = 1; k < sorted.y.size(); ++k)
        if (!(sorted.y[k] >= sorted.y[k - 1] - 1e-9)) trend = false;
      beta_series.push_back(std::move(sorted));
    }
    write_svg(dir / "beta_vs_amplitude.svg",
              {"Fitted decay rate against damping amplitude", "amplitude", "beta", false, true},
              beta_series);

    manifest["status"] = diverged ? "diverged" : (failed ? "partial" : "complete");
    manifest["complete"] = true;
    manifest["finished"] = utc_timestamp();
    manifest["summary"] = {{"points", points.size()},
                           {"diverged", diverged},
                           {"failed", failed},
                           {"beta_nondecreasing_in_amplitude", trend}};
    manifest["artifacts"] = {{"aggregate", "aggregate.csv"},
                             {"energy_plot", "energy.svg"},
                             {"beta_plot", "beta_vs_amplitude.svg"},
                             {"points", "points/<index>/energy.csv"}};
    write_json_atomic(dir / "manifest.json", manifest);
    std::cout << id << " " << points.size() << " points, " << diverged << " diverged, " << failed
              << " failed; beta non-decreasing in amplitude: " << (trend ? "yes" : "no") << "\n"
              << dir.string() << "\n";
    if (diverged) return static_cast<int>(kExitDivergence);
    if (failed) return static_cast<int>(kExitConfig);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace torus_stab::cli
