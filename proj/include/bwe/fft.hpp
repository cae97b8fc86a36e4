#pragma once

// Real FFTs backed by FFTW. Plans are created once per size under a lock
// (FFTW's planner is not reentrant) and executed through the new-array
// interface, which is safe to call concurrently.

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace bwe::fft {

using cplx = std::complex<double>;

namespace detail {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan r2c(std::size_t n) { return get(n, true); }
  fftw_plan c2r(std::size_t n) { return get(n, false); }

 private:
  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mu_);
    auto& plan = plans_[{n, forward}];
    if (plan) return plan;
    const int len = static_cast<int>(n);
    double* re = fftw_alloc_real(n);
    fftw_complex* co = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan = forward ? fftw_plan_dft_r2c_1d(len, re, co, flags) : fftw_plan_dft_c2r_1d(len, co, re, flags);
    fftw_free(re);
    fftw_free(co);
    return plan;
  }

  std::mutex mu_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

inline PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

}  // namespace detail

/// One-sided spectrum of a real frame: n/2 + 1 bins, unnormalized.
inline std::vector<cplx> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n / 2 + 1);
  if (n == 0) return out;
  std::vector<double> in(x.begin(), x.end());
  fftw_execute_dft_r2c(detail::plans().r2c(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Inverse of rfft for an n-point real signal; scaled by 1/n. Imaginary
/// parts of the DC and Nyquist bins are ignored.
inline std::vector<double> irfft(std::span<const cplx> half, std::size_t n) {
  std::vector<double> out(n);
  if (n == 0) return out;
  std::vector<cplx> in(n / 2 + 1);
  for (std::size_t k = 0; k < in.size() && k < half.size(); ++k) in[k] = half[k];
  fftw_execute_dft_c2r(detail::plans().c2r(n), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace bwe::fft
