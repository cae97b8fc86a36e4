#pragma once

// Band-limited resampling with a Kaiser-windowed sinc kernel, and the
// narrowband degradation used to simulate low-rate inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/signal.hpp"

namespace bwe {

struct ResampleConfig {
  int filter_half_width = 32;  // taps per side, counted at the lower of the two rates
  double kaiser_beta = 8.6;
  double rolloff = 0.945;  // cutoff as a fraction of the lower Nyquist frequency
};

inline void validate(const ResampleConfig& cfg) {
  require(cfg.filter_half_width >= 8, "resample: filter_half_width must be >= 8");
  require(cfg.rolloff > 0.0 && cfg.rolloff <= 1.0, "resample: rolloff must lie in (0, 1]");
  require(std::isfinite(cfg.kaiser_beta) && cfg.kaiser_beta >= 0.0, "resample: kaiser_beta must be >= 0");
}

namespace resample_detail {

/// Zeroth-order modified Bessel function of the first kind.
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

inline double sinc(double u) {
  if (u == 0.0) return 1.0;
  const double pu = std::numbers::pi * u;
  return std::sin(pu) / pu;
}

struct Phase {
  std::int64_t first = 0;  // offset of the first tap relative to floor(t)
  std::vector<double> taps;
};

class Kernel {
 public:
  Kernel(int in_rate, int out_rate, const ResampleConfig& cfg) : cfg_(cfg) {
    scale_ = std::min(1.0, static_cast<double>(out_rate) / in_rate);
    cutoff_ = cfg.rolloff * scale_;
    span_ = cfg.filter_half_width / scale_;
    i0_beta_ = bessel_i0(cfg.kaiser_beta);
  }

  /// Taps for fractional position frac in [0, 1).
  Phase phase(double frac) const {
    Phase ph;
    ph.first = static_cast<std::int64_t>(std::ceil(frac - span_));
    const auto last = static_cast<std::int64_t>(std::floor(frac + span_));
    ph.taps.reserve(static_cast<std::size_t>(last - ph.first + 1));
    for (std::int64_t k = ph.first; k <= last; ++k) ph.taps.push_back(weight(frac - static_cast<double>(k)));
    return ph;
  }

 private:
  double weight(double x) const {
    const double u = x / span_;
    if (std::abs(u) >= 1.0) return 0.0;
    const double win = bessel_i0(cfg_.kaiser_beta * std::sqrt(1.0 - u * u)) / i0_beta_;
    return cutoff_ * sinc(cutoff_ * x) * win;
  }

  ResampleConfig cfg_;
  double scale_ = 1.0;
  double cutoff_ = 1.0;
  double span_ = 1.0;
  double i0_beta_ = 1.0;
};

}  // namespace resample_detail

/// Resamples to target_rate. Output length is ceil(N * target / rate); the
/// output sample n sits at input position n * rate / target.
inline Waveform resample(const Waveform& wf, int target_rate, const ResampleConfig& cfg = {}) {
  require(wf.rate > 0, "resample: source rate must be positive");
  require(target_rate > 0, "resample: target rate must be positive");
  validate(cfg);
  if (target_rate == wf.rate) return wf;

  const std::int64_t in_rate = wf.rate;
  const std::int64_t out_rate = target_rate;
  const std::int64_t n_in = static_cast<std::int64_t>(wf.samples.size());
  const std::int64_t n_out = (n_in * out_rate + in_rate - 1) / in_rate;

  // The fractional offset (n * in) mod out repeats with period out / gcd; when
  // that period is small every phase kernel is built once up front.
  const std::int64_t g = std::gcd(in_rate, out_rate);
  const std::int64_t phases = out_rate / g;
  const resample_detail::Kernel kernel(wf.rate, target_rate, cfg);
  constexpr std::int64_t kMaxCachedPhases = 4096;
  std::vector<resample_detail::Phase> cache;
  if (phases <= kMaxCachedPhases) {
    cache.reserve(static_cast<std::size_t>(phases));
    for (std::int64_t p = 0; p < phases; ++p)
      cache.push_back(kernel.phase(static_cast<double>(p * g) / static_cast<double>(out_rate)));
  }

  Waveform out;
  out.rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  const double* x = wf.samples.data();
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t num = n * in_rate;
    const std::int64_t base = num / out_rate;
    const std::int64_t rem = num % out_rate;
    resample_detail::Phase local;
    const resample_detail::Phase* ph = nullptr;
    if (!cache.empty()) {
      ph = &cache[static_cast<std::size_t>(rem / g)];
    } else {
      local = kernel.phase(static_cast<double>(rem) / static_cast<double>(out_rate));
      ph = &local;
    }
    double acc = 0.0;
    const std::int64_t j0 = base + ph->first;
    const auto ntaps = static_cast<std::int64_t>(ph->taps.size());
    const std::int64_t lo = std::max<std::int64_t>(0, -j0);
    const std::int64_t hi = std::min<std::int64_t>(ntaps, n_in - j0);
    for (std::int64_t i = lo; i < hi; ++i) acc += ph->taps[static_cast<std::size_t>(i)] * x[j0 + i];
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

/// Simulates a narrowband capture: down to low_rate, back up to the original
/// rate, then trimmed or zero-padded to the input length.
inline Waveform degrade(const Waveform& wf, int low_rate, const ResampleConfig& cfg = {}) {
  require(low_rate > 0, "degrade: low_rate must be positive");
  if (low_rate >= wf.rate)
    throw_invalid("degrade: low_rate " + std::to_string(low_rate) + " must be below the input rate " +
                  std::to_string(wf.rate));
  Waveform out = resample(resample(wf, low_rate, cfg), wf.rate, cfg);
  out.samples.resize(wf.samples.size(), 0.0);
  return out;
}

}  // namespace bwe
