#pragma once

#include <numbers>
#include <vector>

namespace torus_stab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on the torus [0, 2π) with n nodes x_j = 2πj/n.
///
/// Wavenumbers are the integers −n/2+1, …, n/2; the single unpaired mode
/// +n/2 is the Nyquist mode. A grid is a cheap value type (it only carries
/// n); transforms are looked up per size.
class TorusGrid {
 public:
  static constexpr int kMinSize = 8;
  static constexpr int kMaxSize = 1 << 20;

  /// Throws ConfigError when n is odd or outside [8, 2^20].
  explicit TorusGrid(int n);

  int size() const noexcept { return n_; }
  static constexpr double length() noexcept { return kTwoPi; }
  double spacing() const noexcept { return kTwoPi / n_; }
  double node(int j) const noexcept { return kTwoPi * j / n_; }
  std::vector<double> nodes() const;

  /// Ascending: −n/2+1, …, n/2.
  std::vector<int> wavenumbers() const;
  int nyquist() const noexcept { return n_ / 2; }

  /// Length of the non-negative half spectrum, n/2 + 1.
  int half_size() const noexcept { return n_ / 2 + 1; }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int n_;
};

TorusGrid make_grid(int n);

}  // namespace torus_stab
