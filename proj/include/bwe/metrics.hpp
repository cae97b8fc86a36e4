#pragma once

// Objective metrics for (reference, estimate) pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/fft.hpp"
#include "bwe/resample.hpp"
#include "bwe/signal.hpp"
#include "bwe/spectral.hpp"

namespace bwe::metrics {

struct LsdConfig {
  std::size_t n_fft = 2048;
  std::size_t hop = 512;
  double eps = 1e-10;  // added to power before log10
};

inline constexpr double kRatioCapDb = 200.0;

namespace detail {

inline void require_pair(const Waveform& ref, const Waveform& est, const char* who) {
  if (ref.rate != est.rate)
    throw_invalid(std::string(who) + ": sample rates differ (" + std::to_string(ref.rate) + " vs " +
                  std::to_string(est.rate) + ")");
}

inline std::size_t aligned_length(const Waveform& a, const Waveform& b) { return std::min(a.size(), b.size()); }

}  // namespace detail

/// Mean over frames of the RMS (over bins) of 10 log10(P_ref / P_est).
inline double lsd(const Waveform& ref, const Waveform& est, const LsdConfig& cfg = {}) {
  detail::require_pair(ref, est, "lsd");
  const std::size_t n = detail::aligned_length(ref, est);
  require(n > 0, "lsd: empty signals");
  const auto scfg = StftConfig::make(cfg.n_fft, cfg.n_fft, cfg.hop, true);
  const auto a = stft(std::span<const double>(ref.samples.data(), n), scfg);
  const auto b = stft(std::span<const double>(est.samples.data(), n), scfg);
  const std::size_t bins = a.data.rows(), frames = a.data.cols();
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    double acc = 0.0;
    for (std::size_t f = 0; f < bins; ++f) {
      const double pa = std::norm(a.data(f, t)) + cfg.eps;
      const double pb = std::norm(b.data(f, t)) + cfg.eps;
      const double d = 10.0 * std::log10(pa) - 10.0 * std::log10(pb);
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(bins));
  }
  return total / static_cast<double>(frames);
}

namespace detail {

/// 10 log10(|s|^2 / |e - s|^2) with s the projection of est onto ref.
inline double projection_ratio(std::span<const double> ref, std::span<const double> est, bool zero_mean) {
  const std::size_t n = ref.size();
  double mr = 0.0, me = 0.0;
  if (zero_mean) {
    for (std::size_t i = 0; i < n; ++i) {
      mr += ref[i];
      me += est[i];
    }
    mr /= static_cast<double>(n);
    me /= static_cast<double>(n);
  }
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ref[i] - mr, e = est[i] - me;
    dot += e * r;
    rr += r * r;
  }
  if (!(rr > 0.0)) throw_invalid("si-sdr: reference has zero energy");
  const double g = dot / rr;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = g * (ref[i] - mr);
    const double d = (est[i] - me) - s;
    target += s * s;
    noise += d * d;
  }
  if (noise == 0.0) return kRatioCapDb;
  if (target == 0.0) return -kRatioCapDb;
  return std::clamp(10.0 * std::log10(target / noise), -kRatioCapDb, kRatioCapDb);
}

}  // namespace detail

/// Scale-invariant SDR without mean removal, capped at +200 dB.
inline double si_sdr(const Waveform& ref, const Waveform& est) {
  detail::require_pair(ref, est, "si_sdr");
  const std::size_t n = detail::aligned_length(ref, est);
  require(n > 0, "si_sdr: empty signals");
  return detail::projection_ratio({ref.samples.data(), n}, {est.samples.data(), n}, false);
}

/// Scale-invariant SNR: as si_sdr, after removing each signal's mean.
inline double si_snr(const Waveform& ref, const Waveform& est) {
  detail::require_pair(ref, est, "si_snr");
  const std::size_t n = detail::aligned_length(ref, est);
  require(n > 0, "si_snr: empty signals");
  return detail::projection_ratio({ref.samples.data(), n}, {est.samples.data(), n}, true);
}

// ---------------------------------------------------------------------------
// STOI

struct StoiConfig {
  int rate = 10000;
  std::size_t frame = 256;
  std::size_t n_fft = 512;
  std::size_t bands = 15;
  double min_freq = 150.0;
  std::size_t segment = 30;
  double beta_db = -15.0;
  double dynamic_range_db = 40.0;
};

namespace stoi_detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Symmetric Hann of length n without the zero endpoints (MATLAB hanning).
inline std::vector<double> hanning(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
  return w;
}

struct BandEdges {
  std::vector<std::size_t> lo, hi;  // bin ranges [lo, hi)
};

inline BandEdges third_octave_bands(const StoiConfig& c) {
  const std::size_t nb = c.n_fft / 2 + 1;
  std::vector<double> f(nb);
  for (std::size_t i = 0; i < nb; ++i) f[i] = static_cast<double>(c.rate) * i / static_cast<double>(c.n_fft);
  auto nearest = [&](double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nb; ++i)
      if ((f[i] - target) * (f[i] - target) < (f[best] - target) * (f[best] - target)) best = i;
    return best;
  };
  BandEdges e;
  for (std::size_t k = 0; k < c.bands; ++k) {
    const double kk = static_cast<double>(k);
    e.lo.push_back(nearest(c.min_freq * std::pow(2.0, (2.0 * kk - 1.0) / 6.0)));
    e.hi.push_back(nearest(c.min_freq * std::pow(2.0, (2.0 * kk + 1.0) / 6.0)));
  }
  return e;
}

/// Drops frames of x whose energy is more than dyn_range dB below the
/// loudest, applying the same mask to y, and overlap-adds what remains.
inline void remove_silent_frames(std::vector<double>& x, std::vector<double>& y, const StoiConfig& c) {
  const std::size_t len = c.frame, hop = c.frame / 2;
  const auto w = hanning(len);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + len < x.size(); i += hop) starts.push_back(i);
  std::vector<double> energy(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = w[i] * x[starts[k] + i];
      s += v * v;
    }
    energy[k] = 20.0 * std::log10(std::sqrt(s) + kEps);
  }
  const double top = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < starts.size(); ++k)
    if (top - c.dynamic_range_db - energy[k] < 0.0) keep.push_back(starts[k]);

  const std::size_t out_len = keep.empty() ? 0 : (keep.size() - 1) * hop + len;
  std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k)
    for (std::size_t i = 0; i < len; ++i) {
      xs[k * hop + i] += w[i] * x[keep[k] + i];
      ys[k * hop + i] += w[i] * y[keep[k] + i];
    }
  x = std::move(xs);
  y = std::move(ys);
}

/// |STFT| with hop frame/2, frames starting at 0, hop, ... while start +
/// frame < len.
inline std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x, const StoiConfig& c,
                                                       const BandEdges& e) {
  const std::size_t len = c.frame, hop = c.frame / 2;
  const auto w = hanning(len);
  std::vector<std::vector<double>> env(c.bands);
  std::vector<double> buf(c.n_fft);
  for (std::size_t s = 0; s + len < x.size(); s += hop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < len; ++i) buf[i] = w[i] * x[s + i];
    const auto spec = fft::rfft(buf);
    for (std::size_t b = 0; b < c.bands; ++b) {
      double p = 0.0;
      for (std::size_t k = e.lo[b]; k < e.hi[b]; ++k) p += std::norm(spec[k]);
      env[b].push_back(std::sqrt(p));
    }
  }
  return env;
}

}  // namespace stoi_detail

/// Returned when fewer than one 30-frame segment survives silence removal.
inline constexpr double kStoiDegenerate = 1e-5;

/// Short-time objective intelligibility, clipped to [0, 1].
inline double stoi(const Waveform& ref, const Waveform& est, const StoiConfig& c = {},
                   const ResampleConfig& rcfg = {}) {
  detail::require_pair(ref, est, "stoi");
  if (ref.rate < c.rate) throw_invalid("stoi: sample rate must be at least " + std::to_string(c.rate) + " Hz");
  const std::size_t n = detail::aligned_length(ref, est);
  if (static_cast<double>(n) / ref.rate < 0.4) throw_invalid("stoi: signals must be at least 0.4 s long");

  Waveform a{{ref.samples.begin(), ref.samples.begin() + static_cast<std::ptrdiff_t>(n)}, ref.rate};
  Waveform b{{est.samples.begin(), est.samples.begin() + static_cast<std::ptrdiff_t>(n)}, est.rate};
  if (a.rate != c.rate) {
    a = resample(a, c.rate, rcfg);
    b = resample(b, c.rate, rcfg);
  }
  std::vector<double> x = std::move(a.samples), y = std::move(b.samples);
  stoi_detail::remove_silent_frames(x, y, c);

  const auto edges = stoi_detail::third_octave_bands(c);
  const auto xe = stoi_detail::band_envelopes(x, c, edges);
  const auto ye = stoi_detail::band_envelopes(y, c, edges);
  const std::size_t frames = xe.empty() ? 0 : xe[0].size();
  if (frames < c.segment) return kStoiDegenerate;

  const double clip = std::pow(10.0, -c.beta_db / 20.0);
  const std::size_t N = c.segment;
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xs(N), ys(N);
  for (std::size_t m = N; m <= frames; ++m) {
    for (std::size_t band = 0; band < c.bands; ++band) {
      double nx = 0.0, ny = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        xs[i] = xe[band][m - N + i];
        ys[i] = ye[band][m - N + i];
        nx += xs[i] * xs[i];
        ny += ys[i] * ys[i];
      }
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + stoi_detail::kEps);
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        ys[i] = std::min(ys[i] * alpha, xs[i] * (1.0 + clip));
        mx += xs[i];
        my += ys[i];
      }
      mx /= static_cast<double>(N);
      my /= static_cast<double>(N);
      double sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        xs[i] -= mx;
        ys[i] -= my;
        sx += xs[i] * xs[i];
        sy += ys[i] * ys[i];
      }
      sx = std::sqrt(sx) + stoi_detail::kEps;
      sy = std::sqrt(sy) + stoi_detail::kEps;
      double corr = 0.0;
      for (std::size_t i = 0; i < N; ++i) corr += (xs[i] / sx) * (ys[i] / sy);
      total += corr;
      ++count;
    }
  }
  return std::clamp(total / static_cast<double>(count), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

struct MetricReport {
  double lsd = 0.0;
  double si_sdr = 0.0;
  double si_snr = 0.0;
  double stoi = 0.0;
  LsdConfig lsd_config;
  StoiConfig stoi_config;
  int rate = 0;
  std::size_t samples = 0;
};

inline MetricReport evaluate(const Waveform& ref, const Waveform& est) {
  detail::require_pair(ref, est, "evaluate");
  MetricReport r;
  r.lsd = lsd(ref, est, r.lsd_config);
  r.si_sdr = si_sdr(ref, est);
  r.si_snr = si_snr(ref, est);
  r.stoi = stoi(ref, est, r.stoi_config);
  r.rate = ref.rate;
  r.samples = detail::aligned_length(ref, est);
  return r;
}

}  // namespace bwe::metrics
