#pragma once

// Dual-stream magnitude/phase generator: per-stream input projections, two
// lattice stages each holding one ConformerNeXt block per stream, and output
// heads for the log-magnitude residual and pseudo-real/imaginary phase parts.
// Inference only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/grid.hpp"
#include "bwe/netshape.hpp"
#include "bwe/spectral.hpp"

namespace bwe::gen {

using net::Tensor;

/// Cross-stream gates. Stage s injects alpha_s * phase into the magnitude
/// stream and beta_s * magnitude into the phase stream; 0 disables injection.
struct LatticeScalars {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double beta1 = 0.5;
  double beta2 = 0.5;

  double alpha(std::size_t stage) const { return stage == 0 ? alpha1 : alpha2; }
  double beta(std::size_t stage) const { return stage == 0 ? beta1 : beta2; }
};

struct ConformerNeXtConfig {
  std::size_t heads = 8;
  std::size_t mlp_expansion = 4;
  std::size_t conv_kernel = 7;
};

struct GeneratorGraph {
  std::size_t freq_bins = 257;
  std::size_t frames = 0;  // 0 accepts any frame count
  std::size_t hidden = 256;
  // Order: stage-1 magnitude, stage-1 phase, stage-2 magnitude, stage-2 phase.
  std::array<ConformerNeXtConfig, 4> blocks{};
  LatticeScalars lattice{};
};

inline void validate(const GeneratorGraph& g) {
  require(g.freq_bins >= 1, "generator: freq_bins must be >= 1");
  require(g.hidden >= 1, "generator: hidden width must be >= 1");
  for (const auto& b : g.blocks) {
    require(b.heads >= 1 && g.hidden % b.heads == 0, "generator: heads must divide the hidden width");
    require(b.mlp_expansion >= 1, "generator: mlp expansion must be >= 1");
    require(b.conv_kernel >= 1 && b.conv_kernel % 2 == 1, "generator: ConvNeXt kernel must be odd");
  }
  for (double s : {g.lattice.alpha1, g.lattice.alpha2, g.lattice.beta1, g.lattice.beta2})
    require(std::isfinite(s), "generator: lattice scalars must be finite");
}

struct Linear {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
  std::size_t in = 0, out = 0;
};

struct LayerNorm {
  Tensor gamma, beta;
};

struct ConformerNeXtWeights {
  LayerNorm attn_norm;
  Linear q, k, v, o;
  Tensor dw_weight;  // [D, K]
  Tensor dw_bias;    // [D]
  LayerNorm conv_norm;
  Linear conv_expand, conv_project;
  LayerNorm ff_norm;
  Linear ff_expand, ff_project;
};

struct GeneratorWeights {
  Linear mag_in, phase_in;
  std::array<ConformerNeXtWeights, 4> blocks;
  LayerNorm mag_norm, phase_norm;
  Linear mag_proj, real_proj, imag_proj;

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn&& fn) {
    auto lin = [&](auto& l) {
      fn(l.weight);
      fn(l.bias);
    };
    auto ln = [&](auto& n) {
      fn(n.gamma);
      fn(n.beta);
    };
    lin(self.mag_in);
    lin(self.phase_in);
    for (auto& b : self.blocks) {
      ln(b.attn_norm);
      lin(b.q);
      lin(b.k);
      lin(b.v);
      lin(b.o);
      fn(b.dw_weight);
      fn(b.dw_bias);
      ln(b.conv_norm);
      lin(b.conv_expand);
      lin(b.conv_project);
      ln(b.ff_norm);
      lin(b.ff_expand);
      lin(b.ff_project);
    }
    ln(self.mag_norm);
    ln(self.phase_norm);
    lin(self.mag_proj);
    lin(self.real_proj);
    lin(self.imag_proj);
  }

  std::vector<const Tensor*> ordered() const {
    std::vector<const Tensor*> out;
    visit(*this, [&](const Tensor& t) { out.push_back(&t); });
    return out;
  }
  std::vector<Tensor*> ordered() {
    std::vector<Tensor*> out;
    visit(*this, [&](Tensor& t) { out.push_back(&t); });
    return out;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (const Tensor* t : ordered()) n += t->values.size();
    return n;
  }
};

namespace detail {

inline Tensor zeros(std::string name, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

inline Linear make_linear(const std::string& name, std::size_t in, std::size_t out) {
  return {zeros(name + ".weight", {out, in}), zeros(name + ".bias", {out}), in, out};
}

inline LayerNorm make_norm(const std::string& name, std::size_t d) {
  return {zeros(name + ".weight", {d}), zeros(name + ".bias", {d})};
}

}  // namespace detail

inline GeneratorWeights generator_layout(const GeneratorGraph& g) {
  validate(g);
  using detail::make_linear;
  using detail::make_norm;
  const std::size_t d = g.hidden, f = g.freq_bins;
  GeneratorWeights w;
  w.mag_in = make_linear("mag_in", f, d);
  w.phase_in = make_linear("phase_in", f, d);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = g.blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    auto& b = w.blocks[i];
    b.attn_norm = make_norm(p + "attn_norm", d);
    b.q = make_linear(p + "attn.q", d, d);
    b.k = make_linear(p + "attn.k", d, d);
    b.v = make_linear(p + "attn.v", d, d);
    b.o = make_linear(p + "attn.o", d, d);
    b.dw_weight = detail::zeros(p + "convnext.dw.weight", {d, c.conv_kernel});
    b.dw_bias = detail::zeros(p + "convnext.dw.bias", {d});
    b.conv_norm = make_norm(p + "convnext.norm", d);
    b.conv_expand = make_linear(p + "convnext.expand", d, d * c.mlp_expansion);
    b.conv_project = make_linear(p + "convnext.project", d * c.mlp_expansion, d);
    b.ff_norm = make_norm(p + "ff_norm", d);
    b.ff_expand = make_linear(p + "ff.expand", d, d * c.mlp_expansion);
    b.ff_project = make_linear(p + "ff.project", d * c.mlp_expansion, d);
  }
  w.mag_norm = make_norm("mag_head.norm", d);
  w.phase_norm = make_norm("phase_head.norm", d);
  w.mag_proj = make_linear("mag_head.proj", d, f);
  w.real_proj = make_linear("phase_head.proj_r", d, f);
  w.imag_proj = make_linear("phase_head.proj_i", d, f);
  return w;
}

inline std::size_t param_count(const GeneratorGraph& g) { return generator_layout(g).count(); }

/// Linear and conv terms from U(-0.05, 0.05) in serialisation order; layer
/// norms start at gamma = 1, beta = 0 (everything zero for WeightInit::zeros).
inline GeneratorWeights init_generator(const GeneratorGraph& g, std::uint64_t seed,
                                       net::WeightInit init = net::WeightInit::uniform) {
  GeneratorWeights w = generator_layout(g);
  if (init == net::WeightInit::zeros) return w;
  net::UniformSource rng(seed);
  auto is_norm = [](const std::string& name) { return name.find("norm") != std::string::npos; };
  for (Tensor* t : w.ordered()) {
    if (is_norm(t->name)) {
      const bool gamma = t->name.ends_with(".weight");
      std::fill(t->values.begin(), t->values.end(), gamma ? 1.0 : 0.0);
    } else {
      for (double& v : t->values) v = rng(-net::kInitRange, net::kInitRange);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Building blocks on T x D token matrices (row = frame)

using Tokens = Grid<double>;

inline Tokens linear(const Tokens& x, const Linear& l) {
  require(x.cols() == l.in, "linear: input width mismatch");
  Tokens y(x.rows(), l.out);
  const double* w = l.weight.values.data();
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const auto xr = x.row(t);
    auto yr = y.row(t);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* wr = w + o * l.in;
      double acc = 0.0;
      for (std::size_t i = 0; i < l.in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc + l.bias.values[o];
    }
  }
  return y;
}

inline Tokens layer_norm(const Tokens& x, const LayerNorm& n, double eps = 1e-5) {
  Tokens y(x.rows(), x.cols());
  const std::size_t d = x.cols();
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const auto xr = x.row(t);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    auto yr = y.row(t);
    for (std::size_t i = 0; i < d; ++i) yr[i] = (xr[i] - mean) * inv * n.gamma.values[i] + n.beta.values[i];
  }
  return y;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

inline void gelu_inplace(Tokens& x) {
  for (double& v : x.flat()) v = gelu(v);
}

inline void add_inplace(Tokens& x, const Tokens& y) {
  auto a = x.flat();
  const auto b = y.flat();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline Tokens self_attention(const Tokens& x, const ConformerNeXtWeights& w, std::size_t heads) {
  const Tokens q = linear(x, w.q), k = linear(x, w.k), v = linear(x, w.v);
  const std::size_t T = x.rows(), D = q.cols(), dh = D / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Tokens ctx(T, D);
  std::vector<double> score(T);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dh;
    for (std::size_t i = 0; i < T; ++i) {
      double mx = -1e300;
      for (std::size_t j = 0; j < T; ++j) {
        double s = 0.0;
        for (std::size_t e = 0; e < dh; ++e) s += q(i, off + e) * k(j, off + e);
        score[j] = s * scale;
        mx = std::max(mx, score[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < T; ++j) {
        score[j] = std::exp(score[j] - mx);
        z += score[j];
      }
      for (std::size_t j = 0; j < T; ++j) {
        const double p = score[j] / z;
        for (std::size_t e = 0; e < dh; ++e) ctx(i, off + e) += p * v(j, off + e);
      }
    }
  }
  return linear(ctx, w.o);
}

/// Depthwise convolution along time, zero-padded to keep T.
inline Tokens depthwise_time_conv(const Tokens& x, const Tensor& weight, const Tensor& bias) {
  const std::size_t T = x.rows(), D = x.cols(), K = weight.shape[1];
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(K / 2);
  Tokens y(T, D);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < D; ++c) {
      double acc = bias.values[c];
      for (std::size_t k = 0; k < K; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - half;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
        acc += weight.values[c * K + k] * x(static_cast<std::size_t>(src), c);
      }
      y(t, c) = acc;
    }
  return y;
}

/// Pre-norm self-attention, ConvNeXt sublayer (depthwise conv -> norm ->
/// expand -> GELU -> project), then a feed-forward sublayer; each residual.
inline Tokens conformernext_forward(Tokens x, const ConformerNeXtWeights& w, const ConformerNeXtConfig& cfg) {
  add_inplace(x, self_attention(layer_norm(x, w.attn_norm), w, cfg.heads));

  Tokens c = layer_norm(depthwise_time_conv(x, w.dw_weight, w.dw_bias), w.conv_norm);
  c = linear(c, w.conv_expand);
  gelu_inplace(c);
  add_inplace(x, linear(c, w.conv_project));

  Tokens f = linear(layer_norm(x, w.ff_norm), w.ff_expand);
  gelu_inplace(f);
  add_inplace(x, linear(f, w.ff_project));
  return x;
}

inline Tokens transpose(const Grid<double>& g) {
  Tokens t(g.cols(), g.rows());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) t(c, r) = g(r, c);
  return t;
}

// ---------------------------------------------------------------------------

struct StreamState {
  Tokens mag;
  Tokens phase;
};

/// Runs the two lattice stages. Injection is skipped (not multiplied by zero)
/// when a gate is exactly 0, so zero gates reproduce independent streams.
inline StreamState run_lattice(const GeneratorGraph& g, const GeneratorWeights& w, StreamState s) {
  for (std::size_t stage = 0; stage < 2; ++stage) {
    Tokens m_in = s.mag, p_in = s.phase;
    const double a = g.lattice.alpha(stage), b = g.lattice.beta(stage);
    if (a != 0.0) {
      auto dst = m_in.flat();
      const auto src = s.phase.flat();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    }
    if (b != 0.0) {
      auto dst = p_in.flat();
      const auto src = s.mag.flat();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += b * src[i];
    }
    s.mag = conformernext_forward(std::move(m_in), w.blocks[2 * stage], g.blocks[2 * stage]);
    s.phase = conformernext_forward(std::move(p_in), w.blocks[2 * stage + 1], g.blocks[2 * stage + 1]);
  }
  return s;
}

/// Wideband estimate: magnitude = input log-magnitude + predicted residual;
/// phase = atan2(I, R) from the two phase-head projections.
inline MagPhase generator_forward(const GeneratorGraph& g, const GeneratorWeights& w, const MagPhase& nb) {
  validate(g);
  require_same_shape(nb.mag, nb.phase, "generator_forward");
  if (nb.mag.rows() != g.freq_bins || (g.frames != 0 && nb.mag.cols() != g.frames))
    throw_invalid("generator_forward: input is " + std::to_string(nb.mag.rows()) + "x" +
                  std::to_string(nb.mag.cols()) + ", graph expects " + std::to_string(g.freq_bins) + " bins");
  require(nb.mag.cols() >= 1, "generator_forward: need at least one frame");

  StreamState s{linear(transpose(nb.mag), w.mag_in), linear(transpose(nb.phase), w.phase_in)};
  s = run_lattice(g, w, std::move(s));

  const Tokens residual = linear(layer_norm(s.mag, w.mag_norm), w.mag_proj);
  const Tokens pn = layer_norm(s.phase, w.phase_norm);
  const Tokens re = linear(pn, w.real_proj), im = linear(pn, w.imag_proj);

  MagPhase out{nb.mag, Grid<double>(nb.mag.rows(), nb.mag.cols()), nb.config, nb.length, nb.rate};
  Grid<double> r(nb.mag.rows(), nb.mag.cols()), i(nb.mag.rows(), nb.mag.cols());
  for (std::size_t f = 0; f < g.freq_bins; ++f)
    for (std::size_t t = 0; t < nb.mag.cols(); ++t) {
      out.mag(f, t) += residual(t, f);
      r(f, t) = re(t, f);
      i(f, t) = im(t, f);
    }
  out.phase = phase_from_ri(r, i);
  return out;
}

inline MagPhase generator_forward(const GeneratorGraph& g, const MagPhase& nb, std::uint64_t seed,
                                  net::WeightInit init = net::WeightInit::uniform) {
  return generator_forward(g, init_generator(g, seed, init), nb);
}

}  // namespace bwe::gen
