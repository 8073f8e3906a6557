#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "torus_stab/field.hpp"
#include "torus_stab/model.hpp"
#include "torus_stab/params.hpp"

namespace torus_stab {

enum class RhsKind { ClosedLoop, LinearClosedLoop, Frozen, Undamped };

const char* to_string(RhsKind kind) noexcept;
/// Accepts closed_loop | linear_closed_loop | frozen | undamped.
std::optional<RhsKind> parse_rhs_kind(std::string_view name) noexcept;

using Rhs = std::function<Field(const Field&)>;

/// `frozen` must be set for RhsKind::Frozen. `alpha` scales the nonlinearity
/// of the closed loop (α = 1 is the physical model).
Rhs make_rhs(RhsKind kind, const ModelParams& params,
             const std::optional<FrozenCoefficients>& frozen = std::nullopt, double alpha = 1.0);

/// Named initial profiles.
///  - random: Σ_{1≤k≤modes} c_k e^{ikx} + c.c. with Gaussian c_k damped by
///    e^{−(k/modes)²}, seeded, rescaled to ‖u0‖_{H²} = norm
///  - bump:   BumpProfile (σ-style raised cosine) scaled to amplitude
///  - sine:   amplitude·sin(mode·x)
///  - samples: literal grid values
struct InitialProfile {
  std::string name = "random";
  std::uint64_t seed = 1;
  int modes = 6;
  double norm = 1.0;
  BumpProfile bump{};
  int mode = 1;
  double amplitude = 1.0;
  std::vector<double> samples;
};

/// Throws ConfigError for unknown names or sample lists of the wrong length.
Field make_initial(const TorusGrid& grid, const InitialProfile& profile, const ModelParams& params);

/// Smooth random band-limited field with ‖u‖_{H²} = norm (Nyquist-free).
Field random_smooth_field(const TorusGrid& grid, std::uint64_t seed, int modes, double norm,
                          const ModelParams& params);

struct SimConfig {
  SimConfig(ModelParams p, Field u0) : params(std::move(p)), initial(std::move(u0)) {}

  ModelParams params;
  Field initial;
  double t_final = 1.0;
  std::optional<double> dt;  ///< nullopt: stable_dt
  int snapshot_stride = 10;
  RhsKind rhs = RhsKind::ClosedLoop;
  std::optional<FrozenCoefficients> frozen;
  double alpha = 1.0;
  /// Divergence guard on ‖u‖_{H²}/‖u0‖_{H²}.
  double blowup_factor = 1e6;

  /// Throws ConfigError on T_final ≤ 0, dt ≤ 0, stride < 1, grid mismatch,
  /// missing frozen coefficients.
  void validate() const;
};

/// Time series produced by `simulate`. Energy bookkeeping is stored at every
/// step; snapshots every `snapshot_stride` steps (first and last always).
struct SimulationRecord {
  RhsKind rhs = RhsKind::ClosedLoop;
  double gamma = kConservativeGamma;
  double alpha = 1.0;
  double dt = 0.0;

  std::vector<double> times;
  std::vector<double> energy;            ///< E(t) = ‖u‖²_{H²}
  std::vector<double> damping;           ///< D(t) = ‖σu‖²_{H²}
  std::vector<double> damping_integral;  ///< ∫₀ᵗ D
  std::vector<double> flux_integral;     ///< ∫₀ᵗ ∫u_x³
  std::vector<double> residual;          ///< |E − E0 + 2∫D + 2α(7/48−γ)∫∫u_x³|, NaN for frozen

  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;

  double initial_energy() const { return energy.front(); }
  double final_time() const { return times.back(); }
  double max_residual() const;
  /// E(t_{i+1}) ≤ E(t_i) at every stored step.
  bool energy_non_increasing() const;
  /// Linear interpolation of a per-step series at time t.
  double interpolate(const std::vector<double>& series, double t) const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time,
                  std::shared_ptr<const SimulationRecord> partial = nullptr)
      : std::runtime_error(what), time_(time), partial_(std::move(partial)) {}

  double time() const noexcept { return time_; }
  /// Record up to the last good step, when raised by `simulate`.
  const std::shared_ptr<const SimulationRecord>& partial() const noexcept { return partial_; }

 private:
  double time_;
  std::shared_ptr<const SimulationRecord> partial_;
};

/// RK4 stability constant on the imaginary axis used by `stable_dt`.
inline constexpr double kCflConstant = 2.5;

/// 2.5 / max_k |(k − a1k³ + ak⁵)/m(k)|.
double stable_dt(const TorusGrid& grid, const ModelParams& params);

/// Called with the four stage states (stage index 0..3) of an RK4 step.
using StageObserver = std::function<void(int, const Field&)>;

/// Classical RK4 step. Negative dt integrates backwards. Throws
/// DivergenceError (carrying t) when a stage produces NaN or Inf.
Field rk4_step(const Field& u, double dt, const Rhs& rhs, double t = 0.0,
               const StageObserver& observer = {});

SimulationRecord simulate(const SimConfig& cfg);

}  // namespace torus_stab
