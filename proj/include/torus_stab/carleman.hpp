#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "torus_stab/field.hpp"
#include "torus_stab/model.hpp"
#include "torus_stab/params.hpp"

namespace torus_stab {

/// Spatial Carleman weight ψ on [0, 2π].
///
/// ψ(x) = (x+δ)² on the interior [η/2, 2π−η/2]. Across the seam, ψ′ is a
/// pair of degree-13 two-point Hermite polynomials: on [2π−η/2, 2π] and on
/// [0, η/2]. Each piece matches ψ′ and six further derivatives of the
/// quadratic at its interior end and takes the value v0 with vanishing
/// derivatives at the seam, so ψ^(k)(0) = ψ^(k)(2π) for k = 1..7. ψ itself
/// is the exact antiderivative and is not periodic.
class CarlemanWeight {
 public:
  static constexpr int kBridgeDegree = 13;
  /// Highest derivative `eval` supports. The 8th is needed by h1 and is
  /// continuous on the interior only.
  static constexpr int kMaxOrder = 8;

  double eta() const noexcept { return eta_; }
  double delta() const noexcept { return delta_; }
  /// v0 = ψ′(0) = ψ′(2π).
  double seam_slope() const noexcept { return v0_; }
  int fine_size() const noexcept { return static_cast<int>(fine_nodes_.size()); }

  double interior_lo() const noexcept { return 0.5 * eta_; }
  double interior_hi() const noexcept { return kTwoPi - 0.5 * eta_; }
  bool in_interior(double x) const noexcept { return x >= interior_lo() && x <= interior_hi(); }

  /// ψ^(order)(x) for x ∈ [0, 2π], 0 ≤ order ≤ 8. Throws UnsupportedOrderError.
  double eval(double x, int order = 0) const;

  /// ψ^(order) at the nodes of `grid` (x ∈ [0, 2π)).
  Field sample(const TorusGrid& grid, int order) const;

  /// Fine table x_j = 2πj/(n_fine − 1), j = 0..n_fine−1 (both endpoints).
  const std::vector<double>& fine_nodes() const noexcept { return fine_nodes_; }
  /// ψ^(order) on the fine table, order 0..7.
  const std::vector<double>& table(int order) const;

  double min_slope() const noexcept { return min_slope_; }
  double max_slope() const noexcept { return max_slope_; }
  /// |ψ^(k)(0) − ψ^(k)(2π)|, k = 1..7.
  double seam_mismatch(int k) const;
  double max_seam_mismatch() const;
  /// max |ψ − (x+δ)²| over interior fine nodes.
  double interior_defect() const noexcept { return interior_defect_; }

 private:
  friend CarlemanWeight build_psi(double, double, int, std::optional<double>);
  CarlemanWeight() = default;

  // t-derivatives 0..6 of ψ′ at both ends of a piece, t = (x − x0)/L.
  struct Bridge {
    std::array<double, 7> at0{};
    std::array<double, 7> at1{};
  };
  static double bridge_slope(const Bridge& b, double t, int order);
  static double bridge_integral(const Bridge& b, double t);

  double eta_ = 0.0;
  double delta_ = 0.0;
  double v0_ = 0.0;
  Bridge left_;               // x0 = 2π − η/2
  Bridge right_;              // x0 = 0
  double right_anchor_ = 0.0;  // ψ(0)
  double left_anchor_ = 0.0;   // ψ(2π − η/2)
  std::vector<double> fine_nodes_;
  std::array<std::vector<double>, 8> tables_;
  double min_slope_ = 0.0;
  double max_slope_ = 0.0;
  double interior_defect_ = 0.0;
};

/// Default v0 = 2δ + 0.1·(2(2π+δ) − 2δ).
double default_seam_slope(double delta);

/// Throws ParameterError unless 0 < η < π, δ > 0, n_fine ≥ 16; throws
/// BoundViolationError if 2δ ≤ ψ′ ≤ 2(2π+δ) fails on the fine table.
CarlemanWeight build_psi(double eta, double delta, int n_fine = 4097,
                         std::optional<double> seam_slope = std::nullopt);

/// Indicator of the bridge region {x : dist(x, seam) < η/2} on `grid`.
Field seam_mask(const TorusGrid& grid, double eta);

/// Indicator of the periodic arc (lo, hi) (hi may exceed 2π).
Field arc_mask(const TorusGrid& grid, double lo, double hi);

/// φ(x, t) = ψ(x) − ρ(a/b)²t².
struct SpaceTimeWeight {
  CarlemanWeight weight;
  double rho;
  double a;
  double b;
  double horizon;

  double speed() const noexcept { return a / b; }
  /// ρ(a/b)T > 2π + δ.
  bool admissible() const noexcept;
};

/// Throws ParameterError unless ρ ∈ (0, 1), b > 0, a ≠ 0, T > 0.
SpaceTimeWeight make_space_time_weight(CarlemanWeight weight, double rho, double a, double b,
                                       double horizon);

struct PhiPartials {
  double value;
  double x;
  double t;
  double xx;
  double xt;
  double tt;
};

PhiPartials phi_eval(const SpaceTimeWeight& w, double x, double t);

/// The three sign conditions of the transport estimate, minimized over nodes.
struct TransportSigns {
  /// min over interior nodes of φ_tt + 2(a/b)φ_xt + (a/b)²φ_xx.
  double interior_min;
  double interior_constant;  ///< 2(1−ρ)(a/b)²
  /// min over nodes of −(φ_t + (a/b)φ_x) at t = T and its lower bound.
  double final_min;
  double final_bound;  ///< 2(a/b)(ρ(a/b)T − 2π − δ)
  /// min over nodes of φ_t + (a/b)φ_x at t = 0 and its lower bound.
  double initial_min;
  double initial_bound;  ///< 2(a/b)δ

  bool positive() const noexcept {
    return interior_min > 0.0 && final_min > 0.0 && initial_min > 0.0;
  }
};

TransportSigns transport_signs(const SpaceTimeWeight& w, const TorusGrid& grid);

/// (P_p v, P_n v), the parts of e^{sψ}∂x⁴(e^{−sψ}·) that are formally
/// symmetric and skew-symmetric in L².
std::pair<Field, Field> pp_pn(const Field& v, const CarlemanWeight& w, double s);

/// e^{sψ}∂x⁴(e^{−sψ}v) evaluated as (∂x − sψ′)⁴v, one spectral derivative
/// and one collocation product at a time.
Field conjugated_fourth(const Field& v, const CarlemanWeight& w, double s);

/// h1..h4 on `grid`, so that (P_p v, P_n v) = Σ_i ∫h_i (∂x^{i−1}v)² for v
/// vanishing near the seam.
std::array<Field, 4> h_coeffs(const CarlemanWeight& w, double s, const TorusGrid& grid);

/// Residual ‖e^{sψ}∂x⁴u‖² − ‖P_pv‖² − ‖P_nv‖² − 2Σ∫h_i(∂x^{i−1}v)² and the
/// scale ‖e^{sψ}∂x⁴u‖² it should be compared against.
struct ConjugationDefect {
  double lhs;
  double rhs;
  double relative() const noexcept;
};

ConjugationDefect conjugation_defect(const Field& v, const CarlemanWeight& w, double s);

/// K(s) = min_i min_interior 2h_i / s^{9−2i}.
double interior_constant(const CarlemanWeight& w, double s, const TorusGrid& grid);
/// max_i max_{ω0} |2h_i| / s^{9−2i}, ω0 the bridge region.
double bridge_constant(const CarlemanWeight& w, double s, const TorusGrid& grid);

struct PositivityReport {
  double s0;        ///< smallest s with K(s) ≥ K on the verification grid above
  double K;         ///< reported lower constant
  double K1;        ///< max of `bridge_constant` over the verification grid
  std::vector<double> s_checked;
  std::vector<double> k_checked;
};

/// K = 0.5·K(s_max); s0 by bisection on [1, s_max] and checked on a log grid
/// of `checks` points in [s0, s_max]. Throws ParameterError if K(s_max) ≤ 0.
PositivityReport interior_positivity(const CarlemanWeight& w, const TorusGrid& grid,
                                     double s_max = 1e4, int checks = 25);

/// Uniformly spaced snapshots in time.
struct FieldSeries {
  std::vector<double> times;
  std::vector<Field> fields;

  std::size_t size() const noexcept { return times.size(); }
  double step() const;
  /// Throws ParameterError unless ≥ 2 samples, sizes agree, spacing uniform
  /// to 1e−9 relative, common grid.
  void validate() const;
};

/// Both sides of an inequality LHS ≤ C·RHS and their quotient. The quotient
/// is +∞ if rhs = 0 < lhs. Weights are scaled by e^{−2s·max φ}.
struct CarlemanQuotient {
  double lhs;
  double rhs;
  double quotient;
};

/// LHS ∫[s u_xxx² + s³u_xx² + s⁵u_x² + s⁷u²]e^{2sψ},
/// RHS ∫u_xxxx² e^{2sψ} + ∫_ω(s⁷u² + s³u_xx²)e^{2sψ}.
/// Throws DegenerateInputError when RHS = 0.
CarlemanQuotient elliptic_ratio(const Field& u, const CarlemanWeight& w, double s,
                                const Field& omega_mask);

/// LHS ∫∫s w²e^{2sφ} + s∫[w²e^{2sφ}]_{t=0} + s∫[w²e^{2sφ}]_{t=T},
/// RHS ∫∫|w_t + (a/b)w_x|²e^{2sφ} + ∫∫_ω s w²e^{2sφ}.
/// w_t by centered differences (one-sided at the ends) unless `source` gives
/// w_t + (a/b)w_x directly. Throws DegenerateInputError when RHS = 0.
CarlemanQuotient transport_ratio(const FieldSeries& w, const SpaceTimeWeight& stw, double s,
                                 const Field& omega_mask,
                                 const std::optional<FieldSeries>& source = std::nullopt);

/// LHS ∫∫[s u_xxxx² + s u_xxx² + s³u_xx² + s⁵u_x² + s⁷u²]e^{2sφ} + s∫[|Mu|²e^{2sφ}]_{t=0},
/// RHS ∫∫_ω[s u_xxxx² + s³u_xx² + s⁷u²]e^{2sφ}.
/// +∞ when RHS = 0 < LHS; DegenerateInputError when both vanish.
CarlemanQuotient combined_ratio(const FieldSeries& u, const SpaceTimeWeight& stw, double s,
                                const Field& omega_mask, const ModelParams& params);

/// g^[h](t) = (1/h)∫_t^{t+h} g, by trapezoid on the series with linear
/// interpolation at t+h; returned at the nodes with t ≤ T − h.
/// Throws ParameterError unless 0 < h < T.
FieldSeries time_average(const FieldSeries& series, double h);

/// (∫∫ g² dx dt)^{1/2} by trapezoid in t.
double series_l2_norm(const FieldSeries& series);

/// Smooth random field supported in the interior [η/2, 2π−η/2]: a random
/// trigonometric polynomial of `modes` modes times a raised-cosine cutoff.
Field seam_avoiding_field(const TorusGrid& grid, double eta, std::uint64_t seed, int modes = 4);

/// Frozen-coefficient trajectory from u0 on [0, T] with `snapshots` evenly
/// spaced samples. dt is chosen so that every snapshot falls on a step and
/// the transport CFL number stays below 0.2.
FieldSeries frozen_trajectory(const ModelParams& params, const Field& u0,
                              const FrozenCoefficients& coeffs, double T, int snapshots);

/// Transport counterexample: Remark coefficients, initial bump in (0, ε),
/// ω = (2π−ε, 2π). Quotients for T = 0.9·b(2π−2ε)/a (below the
/// propagation threshold) and T = 1.2·2πb/a (above it).
struct SharpnessProbe {
  double threshold;
  double t_sub;
  double t_super;
  CarlemanQuotient sub;
  CarlemanQuotient super;
};

SharpnessProbe remark_sharpness_probe(const ModelParams& params, double epsilon, double s,
                                      double rho = 0.9, int snapshots = 121);

}  // namespace torus_stab
