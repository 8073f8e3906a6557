#include "torus_stab/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "torus_stab/errors.hpp"

namespace torus_stab {

Spectrum::Spectrum(TorusGrid grid, std::vector<Complex> half)
    : grid_(grid), coeffs_(std::move(half)) {
  if (static_cast<int>(coeffs_.size()) != grid_.half_size())
    throw IncompatibleGridError("spectrum length " + std::to_string(coeffs_.size()) +
                                " does not match grid half size " +
                                std::to_string(grid_.half_size()));
}

Spectrum Spectrum::zeros(const TorusGrid& grid) {
  return {grid, std::vector<Complex>(static_cast<std::size_t>(grid.half_size()))};
}

Complex Spectrum::operator()(int k) const {
  const int n = grid_.size();
  if (k <= -n / 2 || k > n / 2) return {0.0, 0.0};
  if (k >= 0) return coeffs_[static_cast<std::size_t>(k)];
  return std::conj(coeffs_[static_cast<std::size_t>(-k)]);
}

Field Spectrum::to_field() const {
  std::vector<double> v(static_cast<std::size_t>(grid_.size()));
  detail::inverse_real(coeffs_, v);
  return {grid_, std::move(v)};
}

Field::Field(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.size())
    throw IncompatibleGridError("field has " + std::to_string(values_.size()) +
                                " samples on a grid of size " + std::to_string(grid_.size()));
}

Field Field::zeros(const TorusGrid& grid) { return constant(grid, 0.0); }

Field Field::constant(const TorusGrid& grid, double c) {
  return {grid, std::vector<double>(static_cast<std::size_t>(grid.size()), c)};
}

Field Field::sample(const TorusGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) v[static_cast<std::size_t>(j)] = f(grid.node(j));
  return {grid, std::move(v)};
}

Spectrum Field::spectrum() const {
  Spectrum s = Spectrum::zeros(grid_);
  detail::forward_real(values_, s.half());
  return s;
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }

Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

Field& Field::axpy(double c, const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::axpy");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += c * other.values_[j];
  return *this;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (a != b)
    throw IncompatibleGridError(std::string(where) + ": grid sizes differ (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

Spectrum derivative(const Spectrum& f, int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw UnsupportedOrderError("derivative order " + std::to_string(order) +
                                " outside 0.." + std::to_string(kMaxDerivativeOrder));
  Spectrum out = f;
  if (order == 0) return out;
  auto c = out.half();
  const int nyq = f.grid().nyquist();
  for (int k = 0; k <= nyq; ++k) {
    Complex ik{0.0, static_cast<double>(k)};
    Complex factor{1.0, 0.0};
    for (int m = 0; m < order; ++m) factor *= ik;
    c[static_cast<std::size_t>(k)] *= factor;
  }
  if (order % 2 == 1) c[static_cast<std::size_t>(nyq)] = 0.0;
  return out;
}

Field derivative(const Field& f, int order) {
  if (order == 0) return f;
  return derivative(f.spectrum(), order).to_field();
}

Field pointwise_product(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "pointwise_product");
  Field out = f;
  auto v = out.values();
  auto w = g.values();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= w[j];
  return out;
}

std::vector<double> pad_to_physical(const Spectrum& f) {
  const int n = f.grid().size();
  const int nyq = n / 2;
  std::vector<Complex> padded(static_cast<std::size_t>(n + 1));
  auto c = f.half();
  for (int k = 0; k < nyq; ++k) padded[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)];
  // The Nyquist mode of a real field is cos(nx/2); on the finer grid it is
  // the sum of the two modes ±n/2, each carrying half.
  padded[static_cast<std::size_t>(nyq)] = 0.5 * Complex{c[static_cast<std::size_t>(nyq)].real(), 0.0};
  std::vector<double> out(static_cast<std::size_t>(2 * n));
  detail::inverse_real(padded, out);
  return out;
}

Spectrum truncate_from_physical(const TorusGrid& grid, std::span<const double> padded) {
  const int n = grid.size();
  if (static_cast<int>(padded.size()) != 2 * n)
    throw IncompatibleGridError("padded array must have 2n samples");
  std::vector<Complex> fine(static_cast<std::size_t>(n + 1));
  detail::forward_real(padded, fine);
  Spectrum out = Spectrum::zeros(grid);
  auto c = out.half();
  for (int k = 0; k < n / 2; ++k) c[static_cast<std::size_t>(k)] = fine[static_cast<std::size_t>(k)];
  return out;
}

Field dealiased_product(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "dealiased_product");
  std::vector<double> pf = pad_to_physical(f.spectrum());
  const std::vector<double> pg = pad_to_physical(g.spectrum());
  for (std::size_t j = 0; j < pf.size(); ++j) pf[j] *= pg[j];
  return truncate_from_physical(f.grid(), pf).to_field();
}

Field drop_nyquist(const Field& f) {
  Spectrum s = f.spectrum();
  s.half()[static_cast<std::size_t>(f.grid().nyquist())] = 0.0;
  return s.to_field();
}

}  // namespace torus_stab
