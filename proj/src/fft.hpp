#pragma once

#include <span>

#include "torus_stab/field.hpp"

// Real transforms of length n backed by FFTW. Plans are created once per
// size under a lock; executing a plan on new arrays is thread safe.
namespace torus_stab::detail {

/// out[k] = (1/n) Σ_j in[j] e^{−2πijk/n}, k = 0..n/2.
void forward_real(std::span<const double> in, std::span<Complex> out);

/// out[j] = Σ_k c_k e^{2πijk/n} over the full conjugate-symmetric spectrum.
void inverse_real(std::span<const Complex> in, std::span<double> out);

}  // namespace torus_stab::detail
