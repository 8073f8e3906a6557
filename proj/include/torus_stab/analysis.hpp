#pragma once

#include <optional>
#include <string>
#include <utility>

#include "torus_stab/field.hpp"
#include "torus_stab/params.hpp"
#include "torus_stab/timestepper.hpp"

namespace torus_stab {

/// ‖u(t)‖_{H²} ≈ C e^{−βt}‖u0‖_{H²} fitted on the window.
struct DecayFit {
  double C;
  double beta;
  double t_lo;
  double t_hi;
  /// RMS residual of the regression of log(E)/2.
  double residual;
  int samples;
};

/// Least squares through (t, log E(t)/2) on [t_lo, t_hi]; default window
/// [0.1T, 0.9T]. Throws FitError on nonpositive energy or < 2 samples.
DecayFit fit_decay(const SimulationRecord& record,
                   std::optional<std::pair<double, double>> window = std::nullopt);

/// E(0) / ∫₀ᵀ D. A vanishing denominator is reported, not thrown.
struct ObservabilityQuotient {
  double value;  ///< +∞ when infinite
  double numerator;
  double denominator;
  bool infinite;
  std::string diagnostic;
};

/// Throws ParameterError if the record does not reach T.
ObservabilityQuotient observability_quotient(const SimulationRecord& record, double T);

/// sup_t ‖v(t) − w(t)‖_{H²} between the α-scaled nonlinear closed loop and
/// the linear closed loop from the same u0, taken over every time step.
/// Propagates DivergenceError.
double linearization_gap(const Field& u0, double alpha, double T, const ModelParams& params,
                         std::optional<double> dt = std::nullopt);

/// max_k E(kT) / (ratio^k E(0)), ratio = E(T)/E(0), over k = 1..⌊t_end/T⌋.
/// Throws ParameterError if the record covers fewer than two periods.
double energy_semigroup_check(const SimulationRecord& record, double T);

/// Leading right singular vector of the linear closed-loop flow map S(T) in
/// H², by power iteration on S(T)*S(T). The adjoint flow is
/// u_t = −Au − M⁻¹σM(σu), whose RK4 map is the exact discrete adjoint.
/// `factor` is ‖S(T)‖², the one-period contraction of the energy.
struct ContractionEstimate {
  Field state;  ///< normalized to E = 1
  double factor;
  int iterations;
  double change;  ///< relative change of `factor` in the last iteration
};

ContractionEstimate linear_contraction(const ModelParams& params, double T,
                                       std::optional<double> dt = std::nullopt,
                                       int max_iterations = 100, double tol = 1e-8,
                                       std::uint64_t seed = 1);

}  // namespace torus_stab
