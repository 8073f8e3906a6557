#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "torus_stab/field.hpp"
#include "torus_stab/params.hpp"

namespace test_util {

using namespace torus_stab;

// Random trigonometric polynomial with `modes` modes and O(1) coefficients.
inline Field random_field(const TorusGrid& g, std::uint64_t seed, int modes = 12) {
  modes = std::min(modes, g.nyquist() - 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum s = Spectrum::zeros(g);
  s.half()[0] = normal(rng);
  for (int k = 1; k <= modes; ++k) s.half()[static_cast<std::size_t>(k)] = {normal(rng), normal(rng)};
  return s.to_field();
}

inline double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

}  // namespace test_util
