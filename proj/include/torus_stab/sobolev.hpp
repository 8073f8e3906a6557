#pragma once

#include "torus_stab/field.hpp"
#include "torus_stab/params.hpp"

namespace torus_stab {

/// Regularity exponent s of the inner product
///   (u, v)_s = 2π Σ_k m(k)^{s/2} û(k) conj(v̂(k)),  m(k) = 1 + b1k² + bk⁴.
struct SobolevIndex {
  double s;
  double b;
  double b1;

  /// Throws ParameterError unless s ≥ 0, b > 0, b1 > 0.
  SobolevIndex(double s, double b, double b1);
  static SobolevIndex of(double s, const ModelParams& params) {
    return {s, params.b(), params.b1()};
  }
};

/// H^s inner product. At s = 0 it is the L² inner product ∫uv dx.
double hs_inner(const Field& u, const Field& v, const SobolevIndex& idx);

/// ∫uv dx on the torus (discrete Parseval, 2π Σ_k û conj(v̂)).
double l2_inner(const Field& u, const Field& v);

/// E(u) = ∫(u² + b1u_x² + bu_xx²)dx, assembled term by term from the spectrum.
double energy_h2(const Field& u, const ModelParams& params);

/// Σ_k (1 + k²)² |û(k)|²·2π, the unweighted H² norm squared.
double standard_h2(const Field& u);

}  // namespace torus_stab
