#pragma once

#include <optional>
#include <vector>

#include "torus_stab/field.hpp"

namespace torus_stab {

/// γ at which the cubic flux ∫u_x³ drops out of the H² energy balance.
inline constexpr double kConservativeGamma = 7.0 / 48.0;

/// Raised-cosine bump σ(x) = A·((1 + cos(πd/w))/2)^4 for |d| < w, zero
/// elsewhere, where d is the periodic distance to `center` and w = width/2.
/// Its support is the arc ω of length `width`.
struct BumpProfile {
  double center = 0.0;
  double width = std::numbers::pi;
  double amplitude = 1.0;
};

/// Samples the bump at arbitrary x (for refinement checks at other grids).
double bump_value(const BumpProfile& bump, double x);
Field make_bump(const TorusGrid& grid, const BumpProfile& bump);

/// Coefficients of u_t − b1 u_txx + b u_txxxx + a u_5x + a1 u_xxx + … with
/// damping profile σ. Requires b > 0 and b1 > 0.
class ModelParams {
 public:
  ModelParams(double a, double a1, double b, double b1, double gamma, Field sigma);

  /// a = a1 = b = b1 = 1, γ = 7/48, default bump σ.
  static ModelParams defaults(const TorusGrid& grid);

  double a() const noexcept { return a_; }
  double a1() const noexcept { return a1_; }
  double b() const noexcept { return b_; }
  double b1() const noexcept { return b1_; }
  double gamma() const noexcept { return gamma_; }
  const Field& sigma() const noexcept { return sigma_; }
  const TorusGrid& grid() const noexcept { return sigma_.grid(); }

  /// Symbol of M = I − b1∂x² + b∂x⁴: m(k) = 1 + b1k² + bk⁴ ≥ 1.
  double m_symbol(double k) const noexcept { return 1.0 + b1_ * k * k + b_ * k * k * k * k; }

  /// Indicator of ω = {σ ≠ 0} on the grid.
  Field omega_mask() const;
  bool is_damped() const noexcept { return !sigma_.is_zero(); }

  ModelParams with_sigma(Field sigma) const;
  ModelParams with_gamma(double gamma) const;

 private:
  double a_;
  double a1_;
  double b_;
  double b1_;
  double gamma_;
  Field sigma_;
};

}  // namespace torus_stab
