#include "torus_stab/model.hpp"

#include <cmath>
#include <vector>

#include "torus_stab/errors.hpp"
#include "torus_stab/operators.hpp"

namespace torus_stab {

FrozenCoefficients FrozenCoefficients::pure_transport(const ModelParams& params) {
  const double c = params.a() / params.b();
  return constant(params.grid(), c, -c * params.b1(), 0.0);
}

FrozenCoefficients FrozenCoefficients::constant(const TorusGrid& grid, double q, double p,
                                                double r) {
  return {Field::constant(grid, q), Field::constant(grid, p), Field::constant(grid, r)};
}

FrozenCoefficients FrozenCoefficients::from_state(const Field& u, const ModelParams& params) {
  require_same_grid(u.grid(), params.grid(), "FrozenCoefficients::from_state");
  const Field ux = derivative(u, 1);
  Field q = u;
  Field p = u;
  Field r = ux;
  const double g = params.gamma();
  for (int j = 0; j < u.size(); ++j) {
    q[j] = 1.0 + 1.5 * u[j] - 0.375 * u[j] * u[j];
    p[j] = params.a1() + 2.0 * g * u[j];
    r[j] = (6.0 * g - 7.0 / 24.0) * ux[j];
  }
  return {std::move(q), std::move(p), std::move(r)};
}

void FrozenCoefficients::validate() const {
  require_same_grid(q.grid(), p.grid(), "FrozenCoefficients");
  require_same_grid(q.grid(), r.grid(), "FrozenCoefficients");
  for (const Field* f : {&q, &p, &r})
    for (double v : f->values())
      if (!std::isfinite(v)) throw ParameterError("frozen coefficients must be finite");
}

namespace {

// Padded physical samples of u and u_x.
struct Padded {
  std::vector<double> u;
  std::vector<double> ux;
};

Padded pad_state(const Field& u) {
  const Spectrum s = u.spectrum();
  return {pad_to_physical(s), pad_to_physical(derivative(s, 1))};
}

}  // namespace

Field nonlinear_physical_scaled(const Field& u, const ModelParams& params, double alpha) {
  require_same_grid(u.grid(), params.grid(), "nonlinear_physical");
  const TorusGrid& grid = u.grid();
  if (alpha == 0.0) return Field::zeros(grid);
  const Padded p = pad_state(u);
  // N = ∂x[F + γ G_xx] with F = 3/4 u² − 7/48 u_x² − 1/8 u³ and G = u².
  std::vector<double> f(p.u.size());
  std::vector<double> g(p.u.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double v = p.u[j];
    const double vx = p.ux[j];
    f[j] = alpha * (0.75 * v * v - 7.0 / 48.0 * vx * vx) - alpha * alpha * 0.125 * v * v * v;
    g[j] = alpha * v * v;
  }
  Spectrum fs = truncate_from_physical(grid, f);
  const Spectrum gs = truncate_from_physical(grid, g);
  auto fc = fs.half();
  auto gc = gs.half();
  const double gamma = params.gamma();
  for (int k = 0; k < grid.nyquist(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double kk = static_cast<double>(k) * k;
    fc[i] = Complex{0.0, static_cast<double>(k)} * (fc[i] - gamma * kk * gc[i]);
  }
  return fs.to_field();
}

Field nonlinear_physical(const Field& u, const ModelParams& params) {
  return nonlinear_physical_scaled(u, params, 1.0);
}

Field quasilinear_physical(const Field& u, const ModelParams& params) {
  require_same_grid(u.grid(), params.grid(), "quasilinear_physical");
  const Spectrum s = u.spectrum();
  const std::vector<double> v = pad_to_physical(s);
  const std::vector<double> vx = pad_to_physical(derivative(s, 1));
  const std::vector<double> vxx = pad_to_physical(derivative(s, 2));
  const std::vector<double> vxxx = pad_to_physical(derivative(s, 3));
  const double g = params.gamma();
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double q = 1.0 + 1.5 * v[j] - 0.375 * v[j] * v[j];
    const double p = params.a1() + 2.0 * g * v[j];
    const double r = (6.0 * g - 7.0 / 24.0) * vx[j];
    out[j] = q * vx[j] + p * vxxx[j] + r * vxx[j];
  }
  return truncate_from_physical(u.grid(), out).to_field();
}

double cubic_flux(const Field& u) {
  const std::vector<double> vx = pad_to_physical(derivative(u.spectrum(), 1));
  double acc = 0.0;
  for (double d : vx) acc += d * d * d;
  return kTwoPi * acc / static_cast<double>(vx.size());
}

Field closed_loop_rhs_scaled(const Field& u, const ModelParams& params, double alpha) {
  Field out = a_apply(u, params);
  out -= m_power(nonlinear_physical_scaled(u, params, alpha), -1.0, params);
  out -= b_apply(pointwise_product(params.sigma(), u), params);
  return out;
}

Field closed_loop_rhs(const Field& u, const ModelParams& params) {
  return closed_loop_rhs_scaled(u, params, 1.0);
}

Field linear_closed_loop_rhs(const Field& u, const ModelParams& params) {
  Field out = a_apply(u, params);
  out -= b_apply(pointwise_product(params.sigma(), u), params);
  return out;
}

Field undamped_rhs(const Field& u, const ModelParams& params) {
  Field out = a_apply(u, params);
  out -= m_power(nonlinear_physical(u, params), -1.0, params);
  return out;
}

namespace {

// q u_x + p u_xxx + r u_xx with alias-free products.
Field frozen_lower_order(const Field& u, const FrozenCoefficients& c) {
  const Spectrum s = u.spectrum();
  Field out = dealiased_product(c.q, derivative(s, 1).to_field());
  out += dealiased_product(c.p, derivative(s, 3).to_field());
  out += dealiased_product(c.r, derivative(s, 2).to_field());
  return out;
}

Field fifth_derivative(const Field& u) {
  Spectrum s = u.spectrum();
  auto c = s.half();
  const int nyq = u.grid().nyquist();
  for (int k = 0; k <= nyq; ++k) {
    const double k5 = std::pow(static_cast<double>(k), 5);
    c[static_cast<std::size_t>(k)] *= Complex{0.0, k5};
  }
  c[static_cast<std::size_t>(nyq)] = 0.0;
  return s.to_field();
}

}  // namespace

Field frozen_rhs(const Field& u, const FrozenCoefficients& coeffs, const ModelParams& params) {
  require_same_grid(u.grid(), params.grid(), "frozen_rhs");
  require_same_grid(u.grid(), coeffs.q.grid(), "frozen_rhs");
  Field inner = frozen_lower_order(u, coeffs);
  inner.axpy(params.a(), fifth_derivative(u));
  return -m_power(inner, -1.0, params);
}

Field split_elliptic(const Field& u, const ModelParams& params) {
  return m_power(u, 1.0, params);
}

Field transport_source(const Field& u, const FrozenCoefficients& coeffs,
                       const ModelParams& params) {
  require_same_grid(u.grid(), params.grid(), "transport_source");
  require_same_grid(u.grid(), coeffs.q.grid(), "transport_source");
  const double c = params.a() / params.b();
  // (a/b)(u_x − b1u_xxx) − (q u_x + p u_xxx + r u_xx)
  const Spectrum s = u.spectrum();
  Field out = derivative(s, 1).to_field();
  out.axpy(-params.b1(), derivative(s, 3).to_field());
  out *= c;
  out -= frozen_lower_order(u, coeffs);
  return out;
}

}  // namespace torus_stab
