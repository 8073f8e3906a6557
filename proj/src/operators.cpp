#include "torus_stab/operators.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace torus_stab {

Spectrum MultiplierSymbol::apply(const Spectrum& f) const {
  Spectrum out = f;
  auto c = out.half();
  const int nyq = f.grid().nyquist();
  for (int k = 0; k <= nyq; ++k) c[static_cast<std::size_t>(k)] *= rule_(k);
  if (parity_ == Parity::ImaginaryOdd) c[static_cast<std::size_t>(nyq)] = 0.0;
  return out;
}

Field MultiplierSymbol::apply(const Field& f) const { return apply(f.spectrum()).to_field(); }

MultiplierSymbol m_power_symbol(double theta, const ModelParams& params) {
  const double b = params.b();
  const double b1 = params.b1();
  return {[=](int k) {
            const double kk = static_cast<double>(k) * k;
            return Complex{std::pow(1.0 + b1 * kk + b * kk * kk, theta), 0.0};
          },
          MultiplierSymbol::Parity::RealEven};
}

double a_frequency(double k, const ModelParams& params) {
  const double k3 = k * k * k;
  return (k - params.a1() * k3 + params.a() * k3 * k * k) / params.m_symbol(k);
}

MultiplierSymbol a_symbol(const ModelParams& params) {
  return {[params](int k) { return Complex{0.0, -a_frequency(k, params)}; },
          MultiplierSymbol::Parity::ImaginaryOdd};
}

Field m_power(const Field& f, double theta, const ModelParams& params) {
  if (theta == 0.0) return f;
  return m_power_symbol(theta, params).apply(f);
}

Field a_apply(const Field& f, const ModelParams& params) {
  require_same_grid(f.grid(), params.grid(), "a_apply");
  return a_symbol(params).apply(f);
}

Field b_apply(const Field& f, const ModelParams& params) {
  require_same_grid(f.grid(), params.grid(), "b_apply");
  // σ acts by collocation: a diagonal matrix on grid values, so B and its
  // H^s adjoint are exact transposes of each other at the discrete level.
  return m_power(pointwise_product(params.sigma(), m_power(f, 1.0, params)), -1.0, params);
}

Field b_star_apply(const Field& f, double s, const ModelParams& params) {
  require_same_grid(f.grid(), params.grid(), "b_star_apply");
  if (s < 2.0) spdlog::warn("b_star_apply: s = {} is below 2, outside the derived range", s);
  const double theta = 0.5 * s - 1.0;
  return m_power(pointwise_product(params.sigma(), m_power(f, theta, params)), -theta, params);
}

}  // namespace torus_stab
