#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "torus_stab/grid.hpp"

namespace torus_stab {

using Complex = std::complex<double>;

class Field;

/// Fourier coefficients of a real field, stored as the half spectrum
/// k = 0, …, n/2. The forward transform carries the 1/n factor, so
/// f(x) = Σ_k f̂(k) e^{ikx} and coefficients are resolution independent.
/// Negative wavenumbers follow from conjugate symmetry.
class Spectrum {
 public:
  Spectrum(TorusGrid grid, std::vector<Complex> half);
  static Spectrum zeros(const TorusGrid& grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> half() const noexcept { return coeffs_; }
  std::span<Complex> half() noexcept { return coeffs_; }

  /// Coefficient of wavenumber k ∈ {−n/2+1, …, n/2}.
  Complex operator()(int k) const;

  Field to_field() const;

 private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

/// Real-valued function on the torus, held as its n grid samples.
class Field {
 public:
  Field(TorusGrid grid, std::vector<double> values);

  static Field zeros(const TorusGrid& grid);
  static Field constant(const TorusGrid& grid, double c);
  static Field sample(const TorusGrid& grid, const std::function<double(double)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](int j) const noexcept { return values_[static_cast<std::size_t>(j)]; }
  double& operator[](int j) noexcept { return values_[static_cast<std::size_t>(j)]; }

  Spectrum spectrum() const;

  double max_abs() const noexcept;
  bool is_zero() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double c) noexcept;
  /// this += c * other
  Field& axpy(double c, const Field& other);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double c, Field a) { return a *= c; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator-(Field a) { return a *= -1.0; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Throws IncompatibleGridError unless both grids agree.
void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

/// Highest derivative order supported by `derivative`.
inline constexpr int kMaxDerivativeOrder = 7;

/// Spectral derivative: mode k multiplied by (ik)^order. The Nyquist mode is
/// zeroed for odd orders so derivatives of real fields stay real.
Field derivative(const Field& f, int order);
Spectrum derivative(const Spectrum& f, int order);

/// Grid-collocation product (f·g)(x_j) = f(x_j) g(x_j). Aliases.
Field pointwise_product(const Field& f, const Field& g);

/// Alias-free product: both factors are zero-padded to 2n points, multiplied
/// there, and truncated back to |k| < n/2 (Nyquist zeroed).
Field dealiased_product(const Field& f, const Field& g);

/// Removes the Nyquist mode.
Field drop_nyquist(const Field& f);

/// Padding by a factor of two. `pad_to_physical` spreads the Nyquist
/// coefficient evenly over ±n/2; `truncate_from_physical` keeps |k| < n/2.
std::vector<double> pad_to_physical(const Spectrum& f);
Spectrum truncate_from_physical(const TorusGrid& grid, std::span<const double> padded);

}  // namespace torus_stab
