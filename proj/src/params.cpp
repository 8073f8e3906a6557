#include "torus_stab/params.hpp"

#include <cmath>
#include <string>

#include "torus_stab/errors.hpp"

namespace torus_stab {

double bump_value(const BumpProfile& bump, double x) {
  const double half = 0.5 * bump.width;
  if (half <= 0.0) return 0.0;
  double d = std::fmod(x - bump.center, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  d = std::min(d, kTwoPi - d);
  if (d >= half) return 0.0;
  const double c = 0.5 * (1.0 + std::cos(std::numbers::pi * d / half));
  const double c2 = c * c;
  return bump.amplitude * c2 * c2;
}

Field make_bump(const TorusGrid& grid, const BumpProfile& bump) {
  if (!(bump.width > 0.0) || bump.width > kTwoPi)
    throw ParameterError("bump width must lie in (0, 2π]");
  return Field::sample(grid, [&](double x) { return bump_value(bump, x); });
}

ModelParams::ModelParams(double a, double a1, double b, double b1, double gamma, Field sigma)
    : a_(a), a1_(a1), b_(b), b1_(b1), gamma_(gamma), sigma_(std::move(sigma)) {
  for (double v : {a, a1, b, b1, gamma})
    if (!std::isfinite(v)) throw ParameterError("model coefficients must be finite");
  if (!(b > 0.0)) throw ParameterError("b must be positive (got " + std::to_string(b) + ")");
  if (!(b1 > 0.0)) throw ParameterError("b1 must be positive (got " + std::to_string(b1) + ")");
  for (double v : sigma_.values())
    if (!std::isfinite(v)) throw ParameterError("sigma samples must be finite");
}

ModelParams ModelParams::defaults(const TorusGrid& grid) {
  return {1.0, 1.0, 1.0, 1.0, kConservativeGamma, make_bump(grid, BumpProfile{})};
}

Field ModelParams::omega_mask() const {
  Field m = Field::zeros(grid());
  for (int j = 0; j < m.size(); ++j) m[j] = sigma_[j] != 0.0 ? 1.0 : 0.0;
  return m;
}

ModelParams ModelParams::with_sigma(Field sigma) const {
  require_same_grid(grid(), sigma.grid(), "ModelParams::with_sigma");
  return {a_, a1_, b_, b1_, gamma_, std::move(sigma)};
}

ModelParams ModelParams::with_gamma(double gamma) const {
  return {a_, a1_, b_, b1_, gamma, sigma_};
}

}  // namespace torus_stab
