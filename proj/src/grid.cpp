#include "torus_stab/grid.hpp"

#include <string>

#include "torus_stab/errors.hpp"

namespace torus_stab {

TorusGrid::TorusGrid(int n) : n_(n) {
  if (n % 2 != 0) throw ConfigError("n must be even (got " + std::to_string(n) + ")");
  if (n < kMinSize) throw ConfigError("n must be at least 8 (got " + std::to_string(n) + ")");
  if (n > kMaxSize) throw ConfigError("n must not exceed 2^20 (got " + std::to_string(n) + ")");
}

std::vector<double> TorusGrid::nodes() const {
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) x[static_cast<std::size_t>(j)] = node(j);
  return x;
}

std::vector<int> TorusGrid::wavenumbers() const {
  std::vector<int> k;
  k.reserve(static_cast<std::size_t>(n_));
  for (int m = -n_ / 2 + 1; m <= n_ / 2; ++m) k.push_back(m);
  return k;
}

TorusGrid make_grid(int n) { return TorusGrid(n); }

}  // namespace torus_stab
