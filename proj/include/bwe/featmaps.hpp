#pragma once

// Discriminator front-end tensors. Each builder returns a C x H x W stack in
// the layout the matching CNN consumes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/nld.hpp"
#include "bwe/signal.hpp"
#include "bwe/spectral.hpp"

namespace bwe {

struct StackMeta {
  std::string extractor;
  std::vector<std::size_t> channel_scale;  // window / scale / factor per channel
  std::vector<std::size_t> valid_width;    // unpadded entries per channel
  std::vector<bool> degenerate;
  bool normalized = false;
  std::map<std::string, std::string> notes;
};

struct FeatureMapStack {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;  // channel-major
  StackMeta meta;

  FeatureMapStack() = default;
  FeatureMapStack(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w) {}

  double& at(std::size_t c, std::size_t h, std::size_t w) { return data[(c * height + h) * width + w]; }
  double at(std::size_t c, std::size_t h, std::size_t w) const { return data[(c * height + h) * width + w]; }
  std::span<double> channel(std::size_t c) { return {data.data() + c * height * width, height * width}; }
  std::span<const double> channel(std::size_t c) const { return {data.data() + c * height * width, height * width}; }
};

// ---------------------------------------------------------------------------
// MRLD: local Lyapunov exponents over non-overlapping windows

struct MrldConfig {
  std::vector<std::size_t> windows{64, 128, 256, 512, 1024};
  std::size_t dim = 3;
  std::size_t tau = 1;
  std::optional<std::size_t> delta;    // default max(1, w / 8) per window
  double eps = 1e-8;
  std::optional<std::size_t> theiler;  // default dim * tau

  nld::EmbeddingParams params_for(std::size_t w) const {
    auto p = nld::EmbeddingParams::for_window(w, dim, tau);
    if (delta) p.delta = *delta;
    p.eps = eps;
    if (theiler) p.theiler = *theiler;
    return p;
  }
};

/// Raw exponent sequences, one per window size, in config order.
inline std::vector<std::vector<double>> mrld_exponents(std::span<const double> x, const MrldConfig& cfg) {
  std::vector<std::vector<double>> rows;
  rows.reserve(cfg.windows.size());
  for (std::size_t w : cfg.windows) {
    require(w >= 1, "mrld: window sizes must be >= 1");
    const auto p = cfg.params_for(w);
    std::vector<double> lam;
    for (auto seg : frame(x, w, w)) lam.push_back(nld::local_lyapunov(seg, p).lambda);
    rows.push_back(std::move(lam));
  }
  return rows;
}

/// One 1-D channel per window: lambda sequence z-scored over its valid
/// entries, then zero-padded to floor(N / min window).
inline FeatureMapStack mrld_features(const Waveform& wf, const MrldConfig& cfg = {}) {
  require(!cfg.windows.empty(), "mrld: window set is empty");
  const std::size_t min_w = *std::min_element(cfg.windows.begin(), cfg.windows.end());
  require(min_w >= 1, "mrld: window sizes must be >= 1");
  const auto rows = mrld_exponents(wf.samples, cfg);

  FeatureMapStack st(cfg.windows.size(), 1, wf.size() / min_w);
  st.meta.extractor = "mrld";
  st.meta.normalized = true;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const auto& lam = rows[c];
    st.meta.channel_scale.push_back(cfg.windows[c]);
    st.meta.valid_width.push_back(lam.size());
    const auto p = cfg.params_for(cfg.windows[c]);
    const bool short_signal = wf.size() < cfg.windows[c] || lam.empty() ||
                              cfg.windows[c] < (p.dim - 1) * p.tau + p.delta + 1;
    st.meta.degenerate.push_back(short_signal);
    if (short_signal) continue;
    double mean = 0.0;
    for (double v : lam) mean += v;
    mean /= static_cast<double>(lam.size());
    double var = 0.0;
    for (double v : lam) var += (v - mean) * (v - mean);
    var /= static_cast<double>(lam.size());
    auto out = st.channel(c);
    if (!(var > 0.0)) continue;  // zero-variance channel stays at 0
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < lam.size(); ++i) out[i] = (lam[i] - mean) * inv_sd;
  }
  return st;
}

// ---------------------------------------------------------------------------
// MSDFA: DFA fluctuations tiled into S x S maps

inline FeatureMapStack msdfa_features(const Waveform& wf, std::vector<std::size_t> scales = {100, 200, 300, 500, 600},
                                      std::size_t side = 64) {
  require(!scales.empty(), "msdfa: scale set is empty");
  require(side >= 1, "msdfa: tile side must be >= 1");
  std::sort(scales.begin(), scales.end());
  FeatureMapStack st(scales.size(), side, side);
  st.meta.extractor = "msdfa";
  const auto profile = nld::dfa_profile(wf.samples);
  for (std::size_t c = 0; c < scales.size(); ++c) {
    const std::size_t n = scales[c];
    require(n >= 2, "msdfa: scales must be >= 2");
    st.meta.channel_scale.push_back(n);
    st.meta.valid_width.push_back(side);
    const bool too_large = wf.size() < 2 * n;
    st.meta.degenerate.push_back(too_large);
    if (too_large) continue;
    const double f = nld::detail::fluctuation_from_profile(profile, n);
    auto ch = st.channel(c);
    std::fill(ch.begin(), ch.end(), f);
  }
  return st;
}

// ---------------------------------------------------------------------------
// MRAD / MRPD: multi-resolution log-magnitude and phase

struct MultiResSpecConfig {
  std::vector<std::size_t> freq_bins{512, 128, 512};
  std::vector<std::size_t> hops{1024, 256, 1024};
  std::vector<std::size_t> win_lengths{2048, 512, 2048};
  double eps_mag = 1e-5;
};

struct Resolution {
  MagPhase spec;       // rows truncated to freq_bins
  StftConfig stft;     // n_fft = 2 * freq_bins, window clamped to n_fft
  bool window_clamped = false;
};

inline std::vector<Resolution> mrad_mrpd_features(const Waveform& wf, const MultiResSpecConfig& cfg = {}) {
  const std::size_t r = cfg.freq_bins.size();
  if (r == 0 || cfg.hops.size() != r || cfg.win_lengths.size() != r)
    throw_invalid("mrad_mrpd: freq_bins, hops and win_lengths must have equal nonzero length");
  for (std::size_t i = 0; i < r; ++i)
    require(cfg.freq_bins[i] > 0 && cfg.hops[i] > 0 && cfg.win_lengths[i] > 0, "mrad_mrpd: entries must be positive");
  const std::size_t longest = *std::max_element(cfg.win_lengths.begin(), cfg.win_lengths.end());
  if (wf.size() < longest)
    throw_invalid("mrad_mrpd: signal of " + std::to_string(wf.size()) + " samples is shorter than the " +
                  std::to_string(longest) + "-sample window");

  std::vector<Resolution> out;
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t n_fft = 2 * cfg.freq_bins[i];
    const std::size_t win = std::min(cfg.win_lengths[i], n_fft);
    const std::size_t hop = std::min(cfg.hops[i], win);
    Resolution res;
    res.window_clamped = win != cfg.win_lengths[i] || hop != cfg.hops[i];
    res.stft = StftConfig::analysis(n_fft, win, hop, true, cfg.eps_mag);
    const auto full = to_mag_phase(stft(wf, res.stft), cfg.eps_mag);
    const std::size_t keep = cfg.freq_bins[i];
    const std::size_t frames = full.mag.cols();
    res.spec.mag = Grid<double>(keep, frames);
    res.spec.phase = Grid<double>(keep, frames);
    for (std::size_t f = 0; f < keep; ++f)
      for (std::size_t t = 0; t < frames; ++t) {
        res.spec.mag(f, t) = full.mag(f, t);
        res.spec.phase(f, t) = full.phase(f, t);
      }
    res.spec.config = res.stft;
    res.spec.length = full.length;
    res.spec.rate = full.rate;
    out.push_back(std::move(res));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recurrence and Poincare stacks (optional extractors)

/// One channel per decimation factor: the recurrence plot of x[::s], reduced
/// to at most side x side and zero-padded to exactly side x side.
inline FeatureMapStack recurrence_features(const Waveform& wf, std::vector<std::size_t> factors = {1, 2, 4, 8, 16},
                                           std::size_t side = 256) {
  require(!factors.empty(), "recurrence: factor set is empty");
  require(side >= 2, "recurrence: side must be >= 2");
  FeatureMapStack st(factors.size(), side, side);
  st.meta.extractor = "rp";
  for (std::size_t c = 0; c < factors.size(); ++c) {
    const std::size_t s = factors[c];
    require(s >= 1, "recurrence: factors must be >= 1");
    std::vector<double> dec;
    for (std::size_t i = 0; i < wf.size(); i += s) dec.push_back(wf.samples[i]);
    st.meta.channel_scale.push_back(s);
    if (dec.size() < 2) {
      st.meta.valid_width.push_back(0);
      st.meta.degenerate.push_back(true);
      continue;
    }
    const auto rp = nld::recurrence_plot(dec, side);
    st.meta.valid_width.push_back(rp.size);
    st.meta.degenerate.push_back(false);
    for (std::size_t i = 0; i < rp.size; ++i)
      for (std::size_t j = 0; j < rp.size; ++j) st.at(c, i, j) = rp(i, j);
  }
  return st;
}

/// One channel per stride s: (SD1, SD2) of x[::s] as a 1 x 2 map.
inline FeatureMapStack poincare_features(const Waveform& wf, std::vector<std::size_t> strides = {1, 2, 4, 8}) {
  require(!strides.empty(), "poincare: stride set is empty");
  FeatureMapStack st(strides.size(), 1, 2);
  st.meta.extractor = "poincare";
  for (std::size_t c = 0; c < strides.size(); ++c) {
    const std::size_t s = strides[c];
    require(s >= 1, "poincare: strides must be >= 1");
    std::vector<double> dec;
    for (std::size_t i = 0; i < wf.size(); i += s) dec.push_back(wf.samples[i]);
    st.meta.channel_scale.push_back(s);
    st.meta.valid_width.push_back(2);
    const bool short_signal = dec.size() < 3;
    st.meta.degenerate.push_back(short_signal);
    if (short_signal) continue;
    const auto pd = nld::poincare_sd(dec);
    st.at(c, 0, 0) = pd.sd1;
    st.at(c, 0, 1) = pd.sd2;
  }
  return st;
}

}  // namespace bwe
