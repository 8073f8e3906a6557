#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace torus_stab::detail {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Plan on scratch arrays; FFTW_UNALIGNED lets the plans run on any buffer.
  std::vector<double> real(static_cast<std::size_t>(n));
  std::vector<Complex> spec(static_cast<std::size_t>(n / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_r2c_1d(n, real.data(), c, flags),
             fftw_plan_dft_c2r_1d(n, c, real.data(), flags)};
  return cache.emplace(n, p).first->second;
}

}  // namespace

void forward_real(std::span<const double> in, std::span<Complex> out) {
  const int n = static_cast<int>(in.size());
  const PlanPair& p = plans_for(n);
  // r2c leaves the input intact, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / n;
  for (auto& c : out) c *= scale;
}

void inverse_real(std::span<const Complex> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  const PlanPair& p = plans_for(n);
  // c2r overwrites its input.
  std::vector<Complex> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace torus_stab::detail
