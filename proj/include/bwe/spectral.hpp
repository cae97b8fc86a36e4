#pragma once

// STFT analysis/synthesis and the log-magnitude / phase views used by the
// generator's input and output stages.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/fft.hpp"
#include "bwe/grid.hpp"
#include "bwe/signal.hpp"

namespace bwe {

using cplx = std::complex<double>;

enum class Window { hann };

struct StftConfig {
  std::size_t n_fft = 1024;
  std::size_t win_length = 1024;
  std::size_t hop = 256;
  Window window = Window::hann;
  bool center = true;
  double eps_mag = 1e-5;

  /// Validated config suitable for resynthesis; throws unless the window is
  /// constant-overlap-add at this hop.
  static StftConfig make(std::size_t n_fft, std::size_t win_length, std::size_t hop, bool center = true,
                         double eps_mag = 1e-5);
  /// Validated config for analysis only (no COLA requirement).
  static StftConfig analysis(std::size_t n_fft, std::size_t win_length, std::size_t hop, bool center = true,
                             double eps_mag = 1e-5);

  std::size_t bins() const noexcept { return n_fft / 2 + 1; }
};

/// Periodic Hann window of win_length samples, centred inside n_fft.
inline std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.n_fft, 0.0);
  const std::size_t off = (cfg.n_fft - cfg.win_length) / 2;
  for (std::size_t i = 0; i < cfg.win_length; ++i)
    w[off + i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / cfg.win_length);
  return w;
}

inline void validate_shape(const StftConfig& cfg) {
  require(cfg.n_fft >= 2, "stft: n_fft must be >= 2");
  require(cfg.hop >= 1, "stft: hop must be >= 1");
  require(cfg.hop <= cfg.win_length && cfg.win_length <= cfg.n_fft, "stft: require hop <= win_length <= n_fft");
  require(cfg.eps_mag > 0.0, "stft: eps_mag must be positive");
}

/// True when the shifted windows sum to a constant (relative spread < 1e-9).
inline bool is_cola(const StftConfig& cfg) {
  const auto w = analysis_window(cfg);
  double lo = 1e300, hi = -1e300;
  for (std::size_t n = 0; n < cfg.hop; ++n) {
    double s = 0.0;
    for (std::size_t i = n; i < w.size(); i += cfg.hop) s += w[i];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi > 0.0 && (hi - lo) <= 1e-9 * hi;
}

inline StftConfig StftConfig::analysis(std::size_t n_fft, std::size_t win_length, std::size_t hop, bool center,
                                       double eps_mag) {
  StftConfig c{n_fft, win_length, hop, Window::hann, center, eps_mag};
  validate_shape(c);
  return c;
}

inline StftConfig StftConfig::make(std::size_t n_fft, std::size_t win_length, std::size_t hop, bool center,
                                   double eps_mag) {
  StftConfig c = analysis(n_fft, win_length, hop, center, eps_mag);
  if (!is_cola(c))
    throw_invalid("stft: hann window of " + std::to_string(win_length) + " samples is not COLA at hop " +
                  std::to_string(hop));
  return c;
}

/// F x T complex grid; F = n_fft / 2 + 1. `length` is the analysed signal
/// length, which istft reproduces.
struct ComplexSpectrogram {
  Grid<cplx> data;
  StftConfig config;
  std::size_t length = 0;
  int rate = 0;
};

/// Log-magnitude (natural log) and phase in (-pi, pi].
struct MagPhase {
  Grid<double> mag;
  Grid<double> phase;
  StftConfig config;
  std::size_t length = 0;
  int rate = 0;
};

inline std::size_t frame_count(std::size_t n, const StftConfig& cfg) {
  if (cfg.center) return 1 + n / cfg.hop;
  return n < cfg.n_fft ? 0 : 1 + (n - cfg.n_fft) / cfg.hop;
}

inline ComplexSpectrogram stft(std::span<const double> x, const StftConfig& cfg, int rate = 0) {
  validate_shape(cfg);
  if (!cfg.center && x.size() < cfg.n_fft)
    throw_invalid("stft: signal of " + std::to_string(x.size()) + " samples is shorter than one frame");
  const std::size_t pad = cfg.center ? cfg.n_fft / 2 : 0;
  std::vector<double> padded(x.size() + 2 * pad, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));

  const auto w = analysis_window(cfg);
  const std::size_t frames = frame_count(x.size(), cfg);
  ComplexSpectrogram out{Grid<cplx>(cfg.bins(), frames), cfg, x.size(), rate};
  std::vector<double> buf(cfg.n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * cfg.hop;
    for (std::size_t i = 0; i < cfg.n_fft; ++i) {
      const std::size_t k = start + i;
      buf[i] = k < padded.size() ? padded[k] * w[i] : 0.0;
    }
    const auto col = fft::rfft(buf);
    for (std::size_t f = 0; f < col.size(); ++f) out.data(f, t) = col[f];
  }
  return out;
}

inline ComplexSpectrogram stft(const Waveform& wf, const StftConfig& cfg) {
  return stft(std::span<const double>(wf.samples), cfg, wf.rate);
}

/// Overlap-add resynthesis normalised by the summed squared window.
inline Waveform istft(const ComplexSpectrogram& spec) {
  const StftConfig& cfg = spec.config;
  validate_shape(cfg);
  if (!is_cola(cfg)) throw_invalid("istft: configuration is not COLA");
  require(spec.data.rows() == cfg.bins(), "istft: bin count does not match n_fft");

  const std::size_t frames = spec.data.cols();
  const auto w = analysis_window(cfg);
  const std::size_t total = frames == 0 ? 0 : cfg.n_fft + cfg.hop * (frames - 1);
  std::vector<double> acc(total, 0.0), wsum(total, 0.0);
  std::vector<cplx> col(cfg.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < col.size(); ++f) col[f] = spec.data(f, t);
    const auto frame = fft::irfft(col, cfg.n_fft);
    const std::size_t start = t * cfg.hop;
    for (std::size_t i = 0; i < cfg.n_fft; ++i) {
      acc[start + i] += frame[i] * w[i];
      wsum[start + i] += w[i] * w[i];
    }
  }
  for (std::size_t i = 0; i < total; ++i)
    if (wsum[i] > 1e-11) acc[i] /= wsum[i];

  const std::size_t pad = cfg.center ? cfg.n_fft / 2 : 0;
  Waveform out;
  out.rate = spec.rate;
  out.samples.assign(spec.length, 0.0);
  for (std::size_t i = 0; i < spec.length && pad + i < total; ++i) out.samples[i] = acc[pad + i];
  return out;
}

/// Angle in (-pi, pi]; atan2(0, 0) is defined as 0.
inline double principal_angle(double im, double re) noexcept {
  if (im == 0.0 && re == 0.0) return 0.0;
  const double a = std::atan2(im, re);
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

inline MagPhase to_mag_phase(const ComplexSpectrogram& spec, double eps_mag) {
  require(eps_mag > 0.0, "to_mag_phase: eps_mag must be positive");
  MagPhase mp{Grid<double>(spec.data.rows(), spec.data.cols()), Grid<double>(spec.data.rows(), spec.data.cols()),
              spec.config, spec.length, spec.rate};
  const auto z = spec.data.flat();
  auto mag = mp.mag.flat();
  auto ph = mp.phase.flat();
  for (std::size_t i = 0; i < z.size(); ++i) {
    mag[i] = std::log(std::abs(z[i]) + eps_mag);
    ph[i] = principal_angle(z[i].imag(), z[i].real());
  }
  return mp;
}

inline MagPhase to_mag_phase(const ComplexSpectrogram& spec) { return to_mag_phase(spec, spec.config.eps_mag); }

/// Phase recovered from pseudo-real / pseudo-imaginary grids.
inline Grid<double> phase_from_ri(const Grid<double>& re, const Grid<double>& im) {
  require_same_shape(re, im, "phase_from_ri");
  Grid<double> out(re.rows(), re.cols());
  const auto r = re.flat();
  const auto i = im.flat();
  auto o = out.flat();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = principal_angle(i[k], r[k]);
  return out;
}

/// exp(mag) * (cos(phase) + i sin(phase)), entrywise.
inline ComplexSpectrogram synthesize(const MagPhase& mp) {
  require_same_shape(mp.mag, mp.phase, "synthesize");
  ComplexSpectrogram out{Grid<cplx>(mp.mag.rows(), mp.mag.cols()), mp.config, mp.length, mp.rate};
  const auto m = mp.mag.flat();
  const auto p = mp.phase.flat();
  auto z = out.data.flat();
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double a = std::exp(m[k]);
    z[k] = {a * std::cos(p[k]), a * std::sin(p[k])};
  }
  return out;
}

}  // namespace bwe
