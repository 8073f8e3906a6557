#pragma once

#include <functional>

#include "torus_stab/field.hpp"
#include "torus_stab/params.hpp"

namespace torus_stab {

/// A Fourier multiplier û(k) ↦ symbol(k)·û(k).
///
/// Real-even symbols are real and even in k; imaginary-odd symbols are purely
/// imaginary and odd. Both map real fields to real fields; for imaginary-odd
/// symbols the Nyquist mode is dropped because it cannot carry an imaginary
/// coefficient.
class MultiplierSymbol {
 public:
  enum class Parity { RealEven, ImaginaryOdd };

  MultiplierSymbol(std::function<Complex(int)> rule, Parity parity)
      : rule_(std::move(rule)), parity_(parity) {}

  Complex operator()(int k) const { return rule_(k); }
  Parity parity() const noexcept { return parity_; }

  Field apply(const Field& f) const;
  Spectrum apply(const Spectrum& f) const;

 private:
  std::function<Complex(int)> rule_;
  Parity parity_;
};

/// m(k)^θ, the symbol of M^θ.
MultiplierSymbol m_power_symbol(double theta, const ModelParams& params);

/// −i(k − a1k³ + ak⁵)/m(k), the symbol of A = −M⁻¹(∂x + a1∂x³ + a∂x⁵).
MultiplierSymbol a_symbol(const ModelParams& params);

/// Imaginary part of the A symbol, (k − a1k³ + ak⁵)/m(k), i.e. the dispersion relation.
double a_frequency(double k, const ModelParams& params);

Field m_power(const Field& f, double theta, const ModelParams& params);
Field a_apply(const Field& f, const ModelParams& params);

/// B = M⁻¹ σ M.
Field b_apply(const Field& f, const ModelParams& params);

/// H^s adjoint of B: M^{1−s/2} σ M^{s/2−1}. At s = 2 this is σ·f exactly.
/// Values s < 2 are accepted with a logged warning.
Field b_star_apply(const Field& f, double s, const ModelParams& params);

}  // namespace torus_stab
