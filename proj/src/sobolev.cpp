#include "torus_stab/sobolev.hpp"

#include <cmath>

#include "torus_stab/errors.hpp"

namespace torus_stab {

SobolevIndex::SobolevIndex(double s_, double b_, double b1_) : s(s_), b(b_), b1(b1_) {
  if (!(s >= 0.0)) throw ParameterError("Sobolev index s must be nonnegative");
  if (!(b > 0.0) || !(b1 > 0.0)) throw ParameterError("b and b1 must be positive");
}

namespace {

// Real-field mode sums: modes 1..n/2−1 appear twice (±k), 0 and n/2 once.
template <typename Weight>
double mode_sum(const Spectrum& u, const Spectrum& v, Weight weight) {
  auto cu = u.half();
  auto cv = v.half();
  const int nyq = u.grid().nyquist();
  double acc = 0.0;
  for (int k = 0; k <= nyq; ++k) {
    const double mult = (k == 0 || k == nyq) ? 1.0 : 2.0;
    const auto i = static_cast<std::size_t>(k);
    acc += mult * weight(k) * (cu[i] * std::conj(cv[i])).real();
  }
  return kTwoPi * acc;
}

}  // namespace

double hs_inner(const Field& u, const Field& v, const SobolevIndex& idx) {
  require_same_grid(u.grid(), v.grid(), "hs_inner");
  const double half_s = 0.5 * idx.s;
  return mode_sum(u.spectrum(), v.spectrum(), [&](int k) {
    const double kk = static_cast<double>(k) * k;
    return std::pow(1.0 + idx.b1 * kk + idx.b * kk * kk, half_s);
  });
}

double l2_inner(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "l2_inner");
  return mode_sum(u.spectrum(), v.spectrum(), [](int) { return 1.0; });
}

double energy_h2(const Field& u, const ModelParams& params) {
  require_same_grid(u.grid(), params.grid(), "energy_h2");
  const Spectrum s = u.spectrum();
  const double l2 = mode_sum(s, s, [](int) { return 1.0; });
  const double d1 = mode_sum(s, s, [](int k) { return static_cast<double>(k) * k; });
  const double d2 = mode_sum(s, s, [](int k) {
    const double kk = static_cast<double>(k) * k;
    return kk * kk;
  });
  return l2 + params.b1() * d1 + params.b() * d2;
}

double standard_h2(const Field& u) {
  const Spectrum s = u.spectrum();
  return mode_sum(s, s, [](int k) {
    const double w = 1.0 + static_cast<double>(k) * k;
    return w * w;
  });
}

}  // namespace torus_stab
