#include "torus_stab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "torus_stab/errors.hpp"
#include "torus_stab/model.hpp"
#include "torus_stab/operators.hpp"
#include "torus_stab/timestepper.hpp"

namespace torus_stab {

namespace {

// Truncated Taylor series at a point: f(t + h) ≈ Σ_i c_i h^i, i ≤ 8.
using Series = std::array<double, 9>;

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

Series mul(const Series& f, const Series& g) {
  Series out{};
  for (std::size_t n = 0; n < out.size(); ++n)
    for (std::size_t k = 0; k <= n; ++k) out[n] += f[k] * g[n - k];
  return out;
}

// y^m / scale as a series in h about y.
Series power_series(double y, int m, double scale) {
  Series out{};
  for (int i = 0; i <= std::min(m, 8); ++i)
    out[static_cast<std::size_t>(i)] = binomial(m, i) * ipow(y, m - i) / scale;
  return out;
}

// p(y + sign·h) with p(y) = Σ_{k ≤ top} C(6+k, k) y^k.
Series weight_poly(double y, int top, double sign) {
  Series out{};
  for (int k = 0; k <= top; ++k) {
    const double c = binomial(6 + k, k);
    for (int i = 0; i <= std::min(k, 8); ++i)
      out[static_cast<std::size_t>(i)] += c * binomial(k, i) * ipow(y, k - i) * ipow(sign, i);
  }
  return out;
}

// Two-point Taylor interpolant of degree 13 on [0, 1]:
//   P = Σ_j at0_j (t^j/j!)(1−t)^7 p_j(t) + Σ_j at1_j ((t−1)^j/j!) t^7 p_j(1−t),
// p_j(y) = Σ_{k ≤ 6−j} C(6+k, k) y^k. Built as a product of factor series so
// the end conditions hold exactly instead of up to cancellation in a power basis.
Series bridge_series(const std::array<double, 7>& at0, const std::array<double, 7>& at1, double t) {
  Series one_minus{};  // (1 − t − h)^7
  for (int i = 0; i <= 7; ++i)
    one_minus[static_cast<std::size_t>(i)] = binomial(7, i) * ipow(1.0 - t, 7 - i) * ipow(-1.0, i);
  const Series t7 = power_series(t, 7, 1.0);
  Series out{};
  for (int j = 0; j < 7; ++j) {
    const double fj = factorial(j);
    const auto jj = static_cast<std::size_t>(j);
    if (at0[jj] != 0.0) {
      const Series a = mul(mul(power_series(t, j, fj), one_minus), weight_poly(t, 6 - j, 1.0));
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += at0[jj] * a[i];
    }
    if (at1[jj] != 0.0) {
      const Series b = mul(mul(power_series(t - 1.0, j, fj), t7), weight_poly(1.0 - t, 6 - j, -1.0));
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += at1[jj] * b[i];
    }
  }
  return out;
}

}  // namespace

double CarlemanWeight::bridge_slope(const Bridge& b, double t, int order) {
  return factorial(order) * bridge_series(b.at0, b.at1, t)[static_cast<std::size_t>(order)];
}

double CarlemanWeight::bridge_integral(const Bridge& b, double t) {
  // 7-point Gauss–Legendre is exact for the degree-13 integrand.
  static constexpr std::array<double, 7> node{-0.9491079123427585, -0.7415311855993945,
                                              -0.4058451513773972, 0.0,
                                              0.4058451513773972,  0.7415311855993945,
                                              0.9491079123427585};
  static constexpr std::array<double, 7> weight{0.1294849661688697, 0.2797053914892766,
                                                0.3818300505051189, 0.4179591836734694,
                                                0.3818300505051189, 0.2797053914892766,
                                                0.1294849661688697};
  double acc = 0.0;
  for (std::size_t i = 0; i < node.size(); ++i)
    acc += weight[i] * bridge_series(b.at0, b.at1, 0.5 * t * (node[i] + 1.0))[0];
  return 0.5 * t * acc;
}

double CarlemanWeight::eval(double x, int order) const {
  if (order < 0 || order > kMaxOrder)
    throw UnsupportedOrderError("weight derivative order " + std::to_string(order) +
                                " outside 0..8");
  const double len = 0.5 * eta_;
  if (in_interior(x)) {
    switch (order) {
      case 0: return (x + delta_) * (x + delta_);
      case 1: return 2.0 * (x + delta_);
      case 2: return 2.0;
      default: return 0.0;
    }
  }
  const bool right = x < interior_lo();
  const Bridge& c = right ? right_ : left_;
  const double t = right ? x / len : (x - interior_hi()) / len;
  if (order == 0) return (right ? right_anchor_ : left_anchor_) + len * bridge_integral(c, t);
  return bridge_slope(c, t, order - 1) / std::pow(len, order - 1);
}

Field CarlemanWeight::sample(const TorusGrid& grid, int order) const {
  return Field::sample(grid, [&](double x) { return eval(x, order); });
}

const std::vector<double>& CarlemanWeight::table(int order) const {
  if (order < 0 || order > 7) throw UnsupportedOrderError("weight tables hold orders 0..7");
  return tables_[static_cast<std::size_t>(order)];
}

double CarlemanWeight::seam_mismatch(int k) const {
  if (k < 1 || k > 7) throw UnsupportedOrderError("seam matching is defined for k = 1..7");
  return std::abs(eval(0.0, k) - eval(kTwoPi, k));
}

double CarlemanWeight::max_seam_mismatch() const {
  double m = 0.0;
  for (int k = 1; k <= 7; ++k) m = std::max(m, seam_mismatch(k));
  return m;
}

double default_seam_slope(double delta) {
  return 2.0 * delta + 0.1 * (2.0 * (kTwoPi + delta) - 2.0 * delta);
}

CarlemanWeight build_psi(double eta, double delta, int n_fine, std::optional<double> seam_slope) {
  if (!(eta > 0.0 && eta < std::numbers::pi)) throw ParameterError("eta must lie in (0, π)");
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (n_fine < 16) throw ParameterError("fine table needs at least 16 nodes");

  CarlemanWeight w;
  w.eta_ = eta;
  w.delta_ = delta;
  w.v0_ = seam_slope.value_or(default_seam_slope(delta));
  if (!std::isfinite(w.v0_)) throw ParameterError("seam slope must be finite");

  const double len = 0.5 * eta;
  const double lo = len;
  const double hi = kTwoPi - len;
  // In t = (x − x0)/L the j-th t-derivative is L^j times the x-derivative.
  std::array<double, 7> seam{};
  seam[0] = w.v0_;
  std::array<double, 7> at_lo{};
  at_lo[0] = 2.0 * (lo + delta);
  at_lo[1] = 2.0 * len;
  std::array<double, 7> at_hi{};
  at_hi[0] = 2.0 * (hi + delta);
  at_hi[1] = 2.0 * len;
  w.right_ = {seam, at_lo};
  w.left_ = {at_hi, seam};
  w.right_anchor_ = (lo + delta) * (lo + delta) - len * w.bridge_integral(w.right_, 1.0);
  w.left_anchor_ = (hi + delta) * (hi + delta);

  w.fine_nodes_.resize(static_cast<std::size_t>(n_fine));
  for (auto& t : w.tables_) t.resize(static_cast<std::size_t>(n_fine));
  w.min_slope_ = std::numeric_limits<double>::infinity();
  w.max_slope_ = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_fine; ++j) {
    const double x = kTwoPi * j / (n_fine - 1);
    const auto i = static_cast<std::size_t>(j);
    w.fine_nodes_[i] = x;
    for (int k = 0; k <= 7; ++k) w.tables_[static_cast<std::size_t>(k)][i] = w.eval(x, k);
    const double slope = w.tables_[1][i];
    w.min_slope_ = std::min(w.min_slope_, slope);
    w.max_slope_ = std::max(w.max_slope_, slope);
    if (w.in_interior(x))
      w.interior_defect_ =
          std::max(w.interior_defect_, std::abs(w.tables_[0][i] - (x + delta) * (x + delta)));
  }

  const double lower = 2.0 * delta;
  const double upper = 2.0 * (kTwoPi + delta);
  const double tol = 1e-12 * upper;
  if (w.min_slope_ < lower - tol || w.max_slope_ > upper + tol)
    throw BoundViolationError("psi' leaves [" + std::to_string(lower) + ", " +
                                  std::to_string(upper) + "]: min " +
                                  std::to_string(w.min_slope_) + ", max " +
                                  std::to_string(w.max_slope_),
                              w.min_slope_, w.max_slope_);
  return w;
}

Field seam_mask(const TorusGrid& grid, double eta) {
  return Field::sample(grid, [&](double x) {
    const double d = std::min(x, kTwoPi - x);
    return d < 0.5 * eta ? 1.0 : 0.0;
  });
}

Field arc_mask(const TorusGrid& grid, double lo, double hi) {
  return Field::sample(grid, [&](double x) {
    const bool in = (x > lo && x < hi) || (x + kTwoPi > lo && x + kTwoPi < hi) ||
                    (x - kTwoPi > lo && x - kTwoPi < hi);
    return in ? 1.0 : 0.0;
  });
}

bool SpaceTimeWeight::admissible() const noexcept {
  return rho * speed() * horizon > kTwoPi + weight.delta();
}

SpaceTimeWeight make_space_time_weight(CarlemanWeight weight, double rho, double a, double b,
                                       double horizon) {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  if (!(b > 0.0)) throw ParameterError("b must be positive");
  if (a == 0.0 || !std::isfinite(a)) throw ParameterError("a must be finite and nonzero");
  if (!(horizon > 0.0)) throw ParameterError("horizon T must be positive");
  return {std::move(weight), rho, a, b, horizon};
}

PhiPartials phi_eval(const SpaceTimeWeight& w, double x, double t) {
  const double c2 = w.rho * w.speed() * w.speed();
  return {w.weight.eval(x, 0) - c2 * t * t,
          w.weight.eval(x, 1),
          -2.0 * c2 * t,
          w.weight.eval(x, 2),
          0.0,
          -2.0 * c2};
}

TransportSigns transport_signs(const SpaceTimeWeight& w, const TorusGrid& grid) {
  const double c = w.speed();
  const double T = w.horizon;
  TransportSigns out{};
  out.interior_min = std::numeric_limits<double>::infinity();
  out.final_min = std::numeric_limits<double>::infinity();
  out.initial_min = std::numeric_limits<double>::infinity();
  out.interior_constant = 2.0 * (1.0 - w.rho) * c * c;
  out.final_bound = 2.0 * c * (w.rho * c * T - kTwoPi - w.weight.delta());
  out.initial_bound = 2.0 * c * w.weight.delta();
  for (int j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (w.weight.in_interior(x)) {
      for (double t : {0.0, 0.5 * T, T}) {
        const PhiPartials p = phi_eval(w, x, t);
        out.interior_min = std::min(out.interior_min, p.tt + 2.0 * c * p.xt + c * c * p.xx);
      }
    }
    const PhiPartials end = phi_eval(w, x, T);
    out.final_min = std::min(out.final_min, -(end.t + c * end.x));
    const PhiPartials start = phi_eval(w, x, 0.0);
    out.initial_min = std::min(out.initial_min, start.t + c * start.x);
  }
  return out;
}

std::pair<Field, Field> pp_pn(const Field& v, const CarlemanWeight& w, double s) {
  const TorusGrid& grid = v.grid();
  const Field p1 = w.sample(grid, 1);
  const Field p2 = w.sample(grid, 2);
  const Field p3 = w.sample(grid, 3);
  const Field p4 = w.sample(grid, 4);
  const Spectrum vs = v.spectrum();
  const Field v1 = derivative(vs, 1).to_field();
  const Field v2 = derivative(vs, 2).to_field();
  const Field v3 = derivative(vs, 3).to_field();
  const Field v4 = derivative(vs, 4).to_field();
  Field pp = Field::zeros(grid);
  Field pn = Field::zeros(grid);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s2 * s2;
  for (int j = 0; j < grid.size(); ++j) {
    const double a = p1[j];
    const double b = p2[j];
    const double c = p3[j];
    const double d = p4[j];
    pp[j] = (s4 * a * a * a * a + 3.0 * s2 * b * b + 4.0 * s2 * c * a) * v[j] +
            12.0 * s2 * a * b * v1[j] + 6.0 * s2 * a * a * v2[j] + v4[j];
    pn[j] = -(6.0 * s3 * a * a * b + s * d) * v[j] - (4.0 * s3 * a * a * a + 4.0 * s * c) * v1[j] -
            6.0 * s * b * v2[j] - 4.0 * s * a * v3[j];
  }
  return {std::move(pp), std::move(pn)};
}

Field conjugated_fourth(const Field& v, const CarlemanWeight& w, double s) {
  const Field p1 = w.sample(v.grid(), 1);
  Field y = v;
  for (int step = 0; step < 4; ++step) {
    Field dy = derivative(y, 1);
    dy.axpy(-s, pointwise_product(p1, y));
    y = std::move(dy);
  }
  return y;
}

namespace {

// Values f, f′, …, f⁗ at a point.
using Jet = std::array<double, 5>;

Jet operator*(const Jet& f, const Jet& g) {
  static constexpr double binom[5][5] = {
      {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
  Jet out{};
  for (int n = 0; n < 5; ++n)
    for (int k = 0; k <= n; ++k) out[n] += binom[n][k] * f[k] * g[n - k];
  return out;
}

Jet operator*(double c, Jet f) {
  for (double& v : f) v *= c;
  return f;
}

Jet operator+(Jet f, const Jet& g) {
  for (int n = 0; n < 5; ++n) f[n] += g[n];
  return f;
}

std::array<double, 4> h_at(const CarlemanWeight& w, double x, double s) {
  // Ψk = jet of ψ^(k).
  std::array<Jet, 5> psi{};
  for (int k = 1; k <= 4; ++k)
    for (int n = 0; n < 5; ++n) psi[k][n] = w.eval(x, k + n);
  const Jet& q1 = psi[1];
  const Jet& q2 = psi[2];
  const Jet& q3 = psi[3];
  const Jet& q4 = psi[4];
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s2 * s2;

  const Jet q11 = q1 * q1;
  const Jet q111 = q11 * q1;
  const Jet A = s4 * (q11 * q11) + 3.0 * s2 * (q2 * q2) + 4.0 * s2 * (q3 * q1);
  const Jet Bn = 6.0 * s3 * (q11 * q2) + s * q4;
  const Jet Cn = 4.0 * s3 * q111 + 4.0 * s * q3;
  const Jet E = 2.0 * s3 * q111 + 2.0 * s * q3;

  const double h1 = (A * E)[1] - (A * Bn)[0] - (A * (3.0 * s * q2))[2] + (A * (2.0 * s * q1))[3] +
                    (6.0 * s2 * (q1 * q2) * Bn)[1] - (3.0 * s2 * q11 * Bn)[2] - 0.5 * Bn[4];
  const double h2 = (6.0 * s * q2 * A)[0] - (6.0 * s * q1 * A)[1] -
                    (12.0 * s2 * (q1 * q2) * Cn)[0] + (36.0 * s3 * (q1 * (q2 * q2)))[1] -
                    (24.0 * s3 * (q11 * q2))[2] + (3.0 * s2 * q11 * Cn)[1] + 2.0 * Bn[2] + E[3] +
                    (6.0 * s2 * q11 * Bn)[0];
  const double h3 = 12.0 * s3 * (q11 * q2)[0] + 12.0 * s3 * q111[1] - Bn[0] - 3.0 * E[1] -
                    3.0 * s * q4[0];
  const double h4 = 8.0 * s * q2[0];
  return {h1, h2, h3, h4};
}

}  // namespace

std::array<Field, 4> h_coeffs(const CarlemanWeight& w, double s, const TorusGrid& grid) {
  std::array<Field, 4> h{Field::zeros(grid), Field::zeros(grid), Field::zeros(grid),
                         Field::zeros(grid)};
  for (int j = 0; j < grid.size(); ++j) {
    const auto v = h_at(w, grid.node(j), s);
    for (std::size_t i = 0; i < 4; ++i) h[i][j] = v[i];
  }
  return h;
}

namespace {

double trapezoid_x(const Field& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v;
  return acc * f.grid().spacing();
}

double sum_sq(const Field& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return acc * f.grid().spacing();
}

}  // namespace

double ConjugationDefect::relative() const noexcept {
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::numeric_limits<double>::min());
}

ConjugationDefect conjugation_defect(const Field& v, const CarlemanWeight& w, double s) {
  const TorusGrid& grid = v.grid();
  const double lhs = sum_sq(conjugated_fourth(v, w, s));
  const auto [pp, pn] = pp_pn(v, w, s);
  const auto h = h_coeffs(w, s, grid);
  double cross = 0.0;
  Field dv = v;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i > 0) dv = derivative(v, static_cast<int>(i));
    cross += trapezoid_x(pointwise_product(h[i], pointwise_product(dv, dv)));
  }
  return {lhs, sum_sq(pp) + sum_sq(pn) + 2.0 * cross};
}

double interior_constant(const CarlemanWeight& w, double s, const TorusGrid& grid) {
  double k = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (!w.in_interior(x)) continue;
    const auto h = h_at(w, x, s);
    for (int i = 0; i < 4; ++i) k = std::min(k, 2.0 * h[static_cast<std::size_t>(i)] / std::pow(s, 7 - 2 * i));
  }
  return k;
}

double bridge_constant(const CarlemanWeight& w, double s, const TorusGrid& grid) {
  double k = 0.0;
  for (int j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (w.in_interior(x)) continue;
    const auto h = h_at(w, x, s);
    for (int i = 0; i < 4; ++i)
      k = std::max(k, std::abs(2.0 * h[static_cast<std::size_t>(i)]) / std::pow(s, 7 - 2 * i));
  }
  return k;
}

PositivityReport interior_positivity(const CarlemanWeight& w, const TorusGrid& grid, double s_max,
                                     int checks) {
  if (!(s_max > 1.0)) throw ParameterError("s_max must exceed 1");
  if (checks < 2) throw ParameterError("need at least two verification points");
  const double k_top = interior_constant(w, s_max, grid);
  if (!(k_top > 0.0))
    throw ParameterError("interior coefficients are not positive even at s_max");
  const double target = 0.5 * k_top;
  auto ok = [&](double s) { return interior_constant(w, s, grid) >= target; };

  double lo = 0.0;  // log s
  double hi = std::log(s_max);
  if (ok(1.0)) {
    hi = 0.0;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(std::exp(mid)) ? hi : lo) = mid;
    }
  }
  PositivityReport rep{std::exp(hi), target, 0.0, {}, {}};
  // Verify on a log grid; if some point fails, move s0 past it.
  const double l0 = std::log(rep.s0);
  const double l1 = std::log(s_max);
  for (int i = 0; i < checks; ++i) {
    const double s = std::exp(l0 + (l1 - l0) * i / (checks - 1));
    const double k = interior_constant(w, s, grid);
    rep.s_checked.push_back(s);
    rep.k_checked.push_back(k);
    rep.K1 = std::max(rep.K1, bridge_constant(w, s, grid));
  }
  for (std::size_t i = rep.k_checked.size(); i-- > 0;)
    if (rep.k_checked[i] < target) {
      rep.s0 = i + 1 < rep.s_checked.size() ? rep.s_checked[i + 1] : s_max;
      break;
    }
  return rep;
}

double FieldSeries::step() const {
  if (times.size() < 2) throw ParameterError("time series needs at least two samples");
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

void FieldSeries::validate() const {
  if (times.size() < 2) throw ParameterError("time series needs at least two samples");
  if (fields.size() != times.size())
    throw ParameterError("time series has " + std::to_string(times.size()) + " times but " +
                         std::to_string(fields.size()) + " fields");
  const double h = step();
  if (!(h > 0.0)) throw ParameterError("time series must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(times.back())))
      throw ParameterError("time series must be uniformly spaced");
  for (const Field& f : fields) require_same_grid(f.grid(), fields.front().grid(), "FieldSeries");
}

namespace {

// Trapezoid weights on a uniform time grid.
double time_weight(std::size_t i, std::size_t count, double h) {
  return (i == 0 || i + 1 == count) ? 0.5 * h : h;
}

double max_weight_exponent(const CarlemanWeight& w, const TorusGrid& grid) {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.size(); ++j) m = std::max(m, w.eval(grid.node(j), 0));
  return m;
}

// e^{2s(φ(x_j, t) − max φ)}.
Field scaled_weight(const SpaceTimeWeight& stw, const Field& psi, double psi_max, double s, double t) {
  const double shift = stw.rho * stw.speed() * stw.speed() * t * t + psi_max;
  Field e = psi;
  for (int j = 0; j < e.size(); ++j) e[j] = std::exp(2.0 * s * (psi[j] - shift));
  return e;
}

CarlemanQuotient finish(double lhs, double rhs, bool infinite_ok, const char* what) {
  if (!(rhs > 0.0)) {
    if (infinite_ok && lhs > 0.0) return {lhs, rhs, std::numeric_limits<double>::infinity()};
    throw DegenerateInputError(std::string(what) + ": right-hand side vanishes");
  }
  return {lhs, rhs, lhs / rhs};
}

}  // namespace

CarlemanQuotient elliptic_ratio(const Field& u, const CarlemanWeight& w, double s,
                                const Field& omega_mask) {
  const TorusGrid& grid = u.grid();
  require_same_grid(grid, omega_mask.grid(), "elliptic_ratio");
  const Spectrum us = u.spectrum();
  const Field u1 = derivative(us, 1).to_field();
  const Field u2 = derivative(us, 2).to_field();
  const Field u3 = derivative(us, 3).to_field();
  const Field u4 = derivative(us, 4).to_field();
  const double pmax = max_weight_exponent(w, grid);
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  const double s7 = s5 * s * s;
  double lhs = 0.0;
  double rhs = 0.0;
  for (int j = 0; j < grid.size(); ++j) {
    const double e = std::exp(2.0 * s * (w.eval(grid.node(j), 0) - pmax));
    lhs += (s * u3[j] * u3[j] + s3 * u2[j] * u2[j] + s5 * u1[j] * u1[j] + s7 * u[j] * u[j]) * e;
    rhs += (u4[j] * u4[j] + omega_mask[j] * (s7 * u[j] * u[j] + s3 * u2[j] * u2[j])) * e;
  }
  const double dx = grid.spacing();
  return finish(lhs * dx, rhs * dx, false, "elliptic_ratio");
}

CarlemanQuotient transport_ratio(const FieldSeries& w, const SpaceTimeWeight& stw, double s,
                                 const Field& omega_mask, const std::optional<FieldSeries>& source) {
  w.validate();
  const TorusGrid& grid = w.fields.front().grid();
  require_same_grid(grid, omega_mask.grid(), "transport_ratio");
  if (source) {
    source->validate();
    if (source->size() != w.size()) throw ParameterError("source series length differs");
  }
  const std::size_t nt = w.size();
  const double h = w.step();
  const double c = stw.speed();
  const Field psi = stw.weight.sample(grid, 0);
  const double pmax = max_weight_exponent(stw.weight, grid);
  const double dx = grid.spacing();

  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const Field e = scaled_weight(stw, psi, pmax, s, w.times[i]);
    Field src = Field::zeros(grid);
    if (source) {
      src = source->fields[i];
    } else {
      if (i == 0) {
        src = nt >= 3 ? (-1.5 * w.fields[0] + 2.0 * w.fields[1] - 0.5 * w.fields[2]) * (1.0 / h)
                      : (w.fields[1] - w.fields[0]) * (1.0 / h);
      } else if (i + 1 == nt) {
        src = nt >= 3 ? (1.5 * w.fields[i] - 2.0 * w.fields[i - 1] + 0.5 * w.fields[i - 2]) * (1.0 / h)
                      : (w.fields[i] - w.fields[i - 1]) * (1.0 / h);
      } else {
        src = (w.fields[i + 1] - w.fields[i - 1]) * (0.5 / h);
      }
      src.axpy(c, derivative(w.fields[i], 1));
    }
    const Field& f = w.fields[i];
    double in_lhs = 0.0;
    double in_rhs = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
      in_lhs += s * f[j] * f[j] * e[j];
      in_rhs += (src[j] * src[j] + omega_mask[j] * s * f[j] * f[j]) * e[j];
    }
    const double tw = time_weight(i, nt, h);
    lhs += tw * in_lhs * dx;
    rhs += tw * in_rhs * dx;
    if (i == 0 || i + 1 == nt) lhs += in_lhs * dx;
  }
  return finish(lhs, rhs, false, "transport_ratio");
}

CarlemanQuotient combined_ratio(const FieldSeries& u, const SpaceTimeWeight& stw, double s,
                                const Field& omega_mask, const ModelParams& params) {
  u.validate();
  const TorusGrid& grid = u.fields.front().grid();
  require_same_grid(grid, omega_mask.grid(), "combined_ratio");
  require_same_grid(grid, params.grid(), "combined_ratio");
  const std::size_t nt = u.size();
  const double h = u.step();
  const Field psi = stw.weight.sample(grid, 0);
  const double pmax = max_weight_exponent(stw.weight, grid);
  const double dx = grid.spacing();
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  const double s7 = s5 * s * s;

  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const Field e = scaled_weight(stw, psi, pmax, s, u.times[i]);
    const Field& f = u.fields[i];
    const Spectrum fs = f.spectrum();
    const Field f1 = derivative(fs, 1).to_field();
    const Field f2 = derivative(fs, 2).to_field();
    const Field f3 = derivative(fs, 3).to_field();
    const Field f4 = derivative(fs, 4).to_field();
    double in_lhs = 0.0;
    double in_rhs = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
      in_lhs += (s * f4[j] * f4[j] + s * f3[j] * f3[j] + s3 * f2[j] * f2[j] + s5 * f1[j] * f1[j] +
                 s7 * f[j] * f[j]) * e[j];
      in_rhs += omega_mask[j] * (s * f4[j] * f4[j] + s3 * f2[j] * f2[j] + s7 * f[j] * f[j]) * e[j];
    }
    const double tw = time_weight(i, nt, h);
    lhs += tw * in_lhs * dx;
    rhs += tw * in_rhs * dx;
  }
  // s∫|Mu|²e^{2sφ} at t = 0.
  const Field mu = split_elliptic(u.fields.front(), params);
  const Field e0 = scaled_weight(stw, psi, pmax, s, u.times.front());
  double boundary = 0.0;
  for (int j = 0; j < grid.size(); ++j) boundary += mu[j] * mu[j] * e0[j];
  lhs += s * boundary * dx;
  return finish(lhs, rhs, true, "combined_ratio");
}

FieldSeries time_average(const FieldSeries& series, double h) {
  series.validate();
  const double t0 = series.times.front();
  const double span = series.times.back() - t0;
  if (!(h > 0.0 && h < span)) throw ParameterError("averaging window h must lie in (0, T)");
  const std::size_t nt = series.size();
  const double dt = series.step();
  const TorusGrid& grid = series.fields.front().grid();

  // Cumulative trapezoid integral at the nodes.
  std::vector<Field> cum;
  cum.reserve(nt);
  cum.push_back(Field::zeros(grid));
  for (std::size_t i = 1; i < nt; ++i) {
    Field next = cum.back();
    next.axpy(0.5 * dt, series.fields[i - 1]).axpy(0.5 * dt, series.fields[i]);
    cum.push_back(std::move(next));
  }
  // ∫ from t0 to τ with g linear on each cell.
  auto integral_to = [&](double tau) {
    const double pos = (tau - t0) / dt;
    auto m = static_cast<std::size_t>(std::floor(pos + 1e-9));
    m = std::min(m, nt - 1);
    const double frac = pos - static_cast<double>(m);
    if (m + 1 >= nt || frac <= 1e-12) return cum[m];
    const double lam = frac;
    // g(τ) = (1−λ)g_m + λg_{m+1}; area = λdt·(g_m + g(τ))/2.
    Field out = cum[m];
    out.axpy(lam * dt * (1.0 - 0.5 * lam), series.fields[m]);
    out.axpy(0.5 * lam * lam * dt, series.fields[m + 1]);
    return out;
  };

  FieldSeries out;
  const double end = t0 + span - h + 1e-9 * std::max(1.0, span);
  for (std::size_t i = 0; i < nt && series.times[i] <= end; ++i) {
    Field avg = integral_to(series.times[i] + h);
    avg -= cum[i];
    avg *= 1.0 / h;
    out.times.push_back(series.times[i]);
    out.fields.push_back(std::move(avg));
  }
  return out;
}

double series_l2_norm(const FieldSeries& series) {
  const std::size_t nt = series.size();
  if (nt == 0) return 0.0;
  if (nt == 1) return 0.0;
  const double h = series.step();
  double acc = 0.0;
  for (std::size_t i = 0; i < nt; ++i) acc += time_weight(i, nt, h) * sum_sq(series.fields[i]);
  return std::sqrt(acc);
}

Field seam_avoiding_field(const TorusGrid& grid, double eta, std::uint64_t seed, int modes) {
  if (!(eta > 0.0 && eta < std::numbers::pi)) throw ParameterError("eta must lie in (0, π)");
  if (modes < 0) throw ParameterError("modes must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(2 * modes + 1));
  for (double& v : c) v = normal(rng);
  const double centre = std::numbers::pi;
  const double half = 0.95 * (std::numbers::pi - 0.5 * eta);
  return Field::sample(grid, [&](double x) {
    const double d = std::abs(x - centre);
    if (d >= half) return 0.0;
    double p = c[0];
    for (int k = 1; k <= modes; ++k)
      p += c[static_cast<std::size_t>(2 * k - 1)] * std::cos(k * x) +
           c[static_cast<std::size_t>(2 * k)] * std::sin(k * x);
    return p * std::pow(0.5 * (1.0 + std::cos(std::numbers::pi * d / half)), 16);
  });
}

FieldSeries frozen_trajectory(const ModelParams& params, const Field& u0,
                              const FrozenCoefficients& coeffs, double T, int snapshots) {
  if (snapshots < 2) throw ParameterError("a trajectory needs at least two snapshots");
  const TorusGrid& grid = params.grid();
  SimConfig cfg(params, u0);
  cfg.t_final = T;
  cfg.rhs = RhsKind::Frozen;
  cfg.frozen = coeffs;
  const int intervals = snapshots - 1;
  double dt_max = stable_dt(grid, params);
  const double c = std::abs(params.a() / params.b());
  if (c > 0.0) dt_max = std::min(dt_max, 0.2 / (c * grid.nyquist()));
  const int per = std::max(1, static_cast<int>(std::ceil(T / intervals / dt_max)));
  cfg.dt = T / (intervals * per);
  cfg.snapshot_stride = per;
  const SimulationRecord rec = simulate(cfg);
  return {rec.snapshot_times, rec.snapshots};
}

SharpnessProbe remark_sharpness_probe(const ModelParams& params, double epsilon, double s,
                                      double rho, int snapshots) {
  if (!(epsilon > 0.0 && epsilon < 0.5 * std::numbers::pi))
    throw ParameterError("epsilon must lie in (0, π/2)");
  if (!(params.a() > 0.0)) throw ParameterError("the probe needs a > 0");
  if (snapshots < 3) throw ParameterError("the probe needs at least three snapshots");
  const TorusGrid& grid = params.grid();

  SharpnessProbe probe{};
  probe.threshold = params.b() * (kTwoPi - 2.0 * epsilon) / params.a();
  probe.t_sub = 0.9 * probe.threshold;
  probe.t_super = 1.2 * kTwoPi * params.b() / params.a();

  // Smooth bump compactly supported in (0, ε): ((1 + cos(π(x−ε/2)/(ε/2)))/2)^8.
  const double half = 0.5 * epsilon;
  const Field u0 = Field::sample(grid, [&](double x) {
    const double d = std::abs(x - half);
    if (d >= half) return 0.0;
    return std::pow(0.5 * (1.0 + std::cos(std::numbers::pi * d / half)), 8);
  });
  const Field mask = arc_mask(grid, kTwoPi - epsilon, kTwoPi);
  const CarlemanWeight weight = build_psi(std::numbers::pi / 2.0, 0.1);

  const auto coeffs = FrozenCoefficients::pure_transport(params);
  auto run = [&](double T) {
    const FieldSeries series = frozen_trajectory(params, u0, coeffs, T, snapshots);
    const SpaceTimeWeight stw = make_space_time_weight(weight, rho, params.a(), params.b(), T);
    return combined_ratio(series, stw, s, mask, params);
  };
  probe.sub = run(probe.t_sub);
  probe.super = run(probe.t_super);
  return probe;
}

}  // namespace torus_stab
