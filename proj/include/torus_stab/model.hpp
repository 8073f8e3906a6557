#pragma once

#include "torus_stab/field.hpp"
#include "torus_stab/params.hpp"

namespace torus_stab {

/// Given coefficient functions q, p, r of
///   u_t − b1u_txx + bu_txxxx + au_5x + q u_x + p u_xxx + r u_xx = 0.
struct FrozenCoefficients {
  Field q;
  Field p;
  Field r;

  /// q = a/b, p = −a·b1/b, r = 0: the equation reduces to u_t + (a/b)u_x = 0.
  static FrozenCoefficients pure_transport(const ModelParams& params);
  static FrozenCoefficients constant(const TorusGrid& grid, double q, double p, double r);
  /// (q(u), p(u), r(u)) of the quasilinear form, sampled from a given field.
  static FrozenCoefficients from_state(const Field& u, const ModelParams& params);

  /// Throws ParameterError on non-finite samples or mismatched grids.
  void validate() const;
};

/// 3/2 uu_x + γ(u²)_xxx − 7/48 (u_x²)_x − 1/8 (u³)_x, alias free.
Field nonlinear_physical(const Field& u, const ModelParams& params);

/// Same terms with quadratic parts scaled by α and the cubic part by α²,
/// i.e. N(αu)/α. α = 0 gives the zero field.
Field nonlinear_physical_scaled(const Field& u, const ModelParams& params, double alpha);

/// q(u)u_x + p(u)u_xxx + r(u)u_xx with q = 1 + 3/2 u − 3/8 u², p = a1 + 2γu,
/// r = (6γ − 7/24)u_x, alias free.
Field quasilinear_physical(const Field& u, const ModelParams& params);

/// ∫u_x³ dx, exact for band-limited u (evaluated on the padded grid).
double cubic_flux(const Field& u);

/// u_t = Au − M⁻¹N(u) − M⁻¹σM(σu): the damped closed loop, sign chosen so
/// d/dt E = −2‖σu‖²_{H²} − 2(7/48 − γ)∫u_x³.
Field closed_loop_rhs(const Field& u, const ModelParams& params);

/// Closed loop with the nonlinearity scaled as in `nonlinear_physical_scaled`.
Field closed_loop_rhs_scaled(const Field& u, const ModelParams& params, double alpha);

/// Au − M⁻¹σM(σu).
Field linear_closed_loop_rhs(const Field& u, const ModelParams& params);

/// Au − M⁻¹N(u), σ ignored.
Field undamped_rhs(const Field& u, const ModelParams& params);

/// −M⁻¹(a u_5x + q u_x + p u_xxx + r u_xx).
Field frozen_rhs(const Field& u, const FrozenCoefficients& coeffs, const ModelParams& params);

/// w = Mu.
Field split_elliptic(const Field& u, const ModelParams& params);

/// (a/b − q)u_x − (a·b1/b + p)u_xxx − r u_xx: the forcing of
/// w_t + (a/b)w_x for w = Mu along a frozen-coefficient trajectory.
Field transport_source(const Field& u, const FrozenCoefficients& coeffs, const ModelParams& params);

}  // namespace torus_stab
