#pragma once

// Discriminator CNN descriptors: exact parameter accounting for standard and
// depthwise-separable convolutions, and an inference-only forward pass with
// deterministic weights.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/featmaps.hpp"

namespace bwe::net {

enum class ConvKind { standard, depthwise_separable };

inline const char* to_string(ConvKind k) {
  return k == ConvKind::standard ? "standard" : "depthwise_separable";
}

struct ConvSpec {
  ConvKind kind = ConvKind::standard;
  int dims = 1;  // 1 or 2; 2-D kernels are K x K
  std::size_t kernel = 1;
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t stride = 1;
  bool bias = true;
};

inline void validate(const ConvSpec& s) {
  require(s.dims == 1 || s.dims == 2, "conv: dims must be 1 or 2");
  require(s.kernel >= 1, "conv: kernel must be >= 1");
  require(s.c_in >= 1 && s.c_out >= 1, "conv: channels must be >= 1");
  require(s.stride >= 1, "conv: stride must be >= 1");
}

inline std::size_t kernel_area(const ConvSpec& s) { return s.dims == 2 ? s.kernel * s.kernel : s.kernel; }

/// standard: K^d * Cin * Cout (+ Cout)
/// depthwise-separable: K^d * Cin (+ Cin) + Cin * Cout (+ Cout)
inline std::size_t conv_params(const ConvSpec& s) {
  validate(s);
  const std::size_t kk = kernel_area(s);
  if (s.kind == ConvKind::standard) return kk * s.c_in * s.c_out + (s.bias ? s.c_out : 0);
  return kk * s.c_in + (s.bias ? s.c_in : 0) + s.c_in * s.c_out + (s.bias ? s.c_out : 0);
}

/// Same layer realised as a standard convolution.
inline ConvSpec as_standard(ConvSpec s) {
  s.kind = ConvKind::standard;
  return s;
}

struct Layer {
  ConvSpec conv;
  bool batch_norm = false;  // 2 * c_out affine parameters
  bool leaky_relu = false;
};

struct NetDescriptor {
  std::string name;
  std::size_t input_channels = 1;
  std::vector<Layer> layers;
};

inline void validate(const NetDescriptor& net) {
  std::size_t c = net.input_channels;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i].conv;
    validate(l);
    if (l.c_in != c)
      throw_invalid(net.name + ": layer " + std::to_string(i) + " expects " + std::to_string(l.c_in) +
                    " input channels but receives " + std::to_string(c));
    if (i > 0) require(l.dims == net.layers[0].conv.dims, net.name + ": mixed 1-D and 2-D layers");
    c = l.c_out;
  }
}

inline std::size_t layer_params(const Layer& l) { return conv_params(l.conv) + (l.batch_norm ? 2 * l.conv.c_out : 0); }

inline std::size_t param_count(const NetDescriptor& net) {
  std::size_t total = 0;
  for (const auto& l : net.layers) total += layer_params(l);
  return total;
}

/// Standard-convolution parameters over factorised parameters, conv weights
/// only (norm layers excluded). 1.0 for a net without separable layers.
inline double dsc_reduction_ratio(const NetDescriptor& net) {
  std::size_t std_params = 0, actual = 0;
  for (const auto& l : net.layers) {
    std_params += conv_params(as_standard(l.conv));
    actual += conv_params(l.conv);
  }
  return actual == 0 ? 1.0 : static_cast<double>(std_params) / static_cast<double>(actual);
}

// Widths found by exhaustive search over multiples of 16-64 for the parameter
// totals closest to 235.5K (1-D) and 247.7K (2-D) with 5 input channels.
inline const std::vector<std::size_t> kMrldWidths{160, 256, 320, 320, 1};
inline const std::vector<std::size_t> kMsdfaWidths{96, 192, 320, 448, 1};

namespace detail {

inline NetDescriptor five_layer_dsc(std::string name, int dims, std::span<const std::size_t> widths,
                                    std::size_t in_channels) {
  require(widths.size() == 5, name + ": expected 5 layer widths");
  constexpr std::size_t kernels[5] = {5, 5, 5, 5, 3};
  constexpr std::size_t strides[5] = {2, 2, 2, 2, 1};
  NetDescriptor net{std::move(name), in_channels, {}};
  std::size_t c = in_channels;
  for (std::size_t i = 0; i < 5; ++i) {
    ConvSpec s{ConvKind::depthwise_separable, dims, kernels[i], c, widths[i], strides[i], true};
    net.layers.push_back({s, true, true});
    c = widths[i];
  }
  validate(net);
  return net;
}

}  // namespace detail

/// Five depthwise-separable 1-D layers: kernels 5,5,5,5,3; strides 2,2,2,2,1;
/// each followed by batch norm and a leaky rectifier.
inline NetDescriptor build_mrld_cnn(std::span<const std::size_t> widths = kMrldWidths, std::size_t in_channels = 5) {
  return detail::five_layer_dsc("mrld", 1, widths, in_channels);
}

/// 2-D counterpart of build_mrld_cnn with K x K kernels.
inline NetDescriptor build_msdfa_cnn(std::span<const std::size_t> widths = kMsdfaWidths, std::size_t in_channels = 5) {
  return detail::five_layer_dsc("msdfa", 2, widths, in_channels);
}

// ---------------------------------------------------------------------------
// Weights

/// Uniform doubles from the raw mt19937_64 stream (whose output sequence is
/// fixed by the standard), so a seed reproduces the same weights everywhere.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 gen_;
};

enum class WeightInit { uniform, zeros };

inline constexpr double kInitRange = 0.05;
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kBnEps = 1e-5;

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

struct LayerWeights {
  Tensor kernel;          // standard: [Cout, Cin, K(, K)]; separable: depthwise [Cin, K(, K)]
  Tensor kernel_bias;     // standard: [Cout]; separable: [Cin]
  Tensor pointwise;       // separable only: [Cout, Cin]
  Tensor pointwise_bias;  // separable only: [Cout]
  Tensor bn_gamma;
  Tensor bn_beta;
};

struct NetWeights {
  std::vector<LayerWeights> layers;

  /// Tensors in serialisation order, skipping empty ones.
  std::vector<const Tensor*> ordered() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers)
      for (const Tensor* t : {&l.kernel, &l.kernel_bias, &l.pointwise, &l.pointwise_bias, &l.bn_gamma, &l.bn_beta})
        if (!t->shape.empty()) out.push_back(t);
    return out;
  }
  std::vector<Tensor*> ordered() {
    std::vector<Tensor*> out;
    for (auto& l : layers)
      for (Tensor* t : {&l.kernel, &l.kernel_bias, &l.pointwise, &l.pointwise_bias, &l.bn_gamma, &l.bn_beta})
        if (!t->shape.empty()) out.push_back(t);
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const Tensor* t : ordered()) n += t->values.size();
    return n;
  }
};

namespace detail {

inline std::size_t numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

inline Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  Tensor t{std::move(name), std::move(shape), {}};
  t.values.assign(numel(t.shape), 0.0);
  return t;
}

}  // namespace detail

/// Shapes for every trainable tensor of the net, zero-filled.
inline NetWeights weight_layout(const NetDescriptor& net) {
  validate(net);
  NetWeights w;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const auto& s = l.conv;
    const std::string p = "layer" + std::to_string(i) + ".";
    std::vector<std::size_t> ks = s.dims == 2 ? std::vector<std::size_t>{s.kernel, s.kernel}
                                              : std::vector<std::size_t>{s.kernel};
    LayerWeights lw;
    if (s.kind == ConvKind::standard) {
      std::vector<std::size_t> shape{s.c_out, s.c_in};
      shape.insert(shape.end(), ks.begin(), ks.end());
      lw.kernel = detail::make_tensor(p + "conv.weight", shape);
      if (s.bias) lw.kernel_bias = detail::make_tensor(p + "conv.bias", {s.c_out});
    } else {
      std::vector<std::size_t> shape{s.c_in};
      shape.insert(shape.end(), ks.begin(), ks.end());
      lw.kernel = detail::make_tensor(p + "depthwise.weight", shape);
      if (s.bias) lw.kernel_bias = detail::make_tensor(p + "depthwise.bias", {s.c_in});
      lw.pointwise = detail::make_tensor(p + "pointwise.weight", {s.c_out, s.c_in});
      if (s.bias) lw.pointwise_bias = detail::make_tensor(p + "pointwise.bias", {s.c_out});
    }
    if (l.batch_norm) {
      lw.bn_gamma = detail::make_tensor(p + "bn.weight", {s.c_out});
      lw.bn_beta = detail::make_tensor(p + "bn.bias", {s.c_out});
    }
    w.layers.push_back(std::move(lw));
  }
  return w;
}

/// Conv weights and biases drawn from U(-0.05, 0.05) in serialisation order;
/// batch-norm affine terms start at gamma = 1, beta = 0 (all zero for
/// WeightInit::zeros).
inline NetWeights init_weights(const NetDescriptor& net, std::uint64_t seed, WeightInit init = WeightInit::uniform) {
  NetWeights w = weight_layout(net);
  if (init == WeightInit::zeros) return w;
  UniformSource rng(seed);
  for (auto& l : w.layers) {
    for (Tensor* t : {&l.kernel, &l.kernel_bias, &l.pointwise, &l.pointwise_bias})
      for (double& v : t->values) v = rng(-kInitRange, kInitRange);
    for (double& v : l.bn_gamma.values) v = 1.0;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Forward pass

/// C x H x W activation; 1-D activations use H = 1.
struct Activation {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> data;

  double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }
};

/// floor((L + 2 * floor(K / 2) - K) / stride) + 1
inline std::size_t conv_out_length(std::size_t len, std::size_t kernel, std::size_t stride) {
  return (len + 2 * (kernel / 2) - kernel) / stride + 1;
}

namespace detail {

// Per-channel spatial filter (groups = channels) when `depthwise`, otherwise
// a dense convolution. Zero padding of K / 2 on each convolved axis.
inline Activation spatial_conv(const Activation& in, const ConvSpec& s, const Tensor& kernel, const Tensor* bias,
                               bool depthwise) {
  const bool two_d = s.dims == 2;
  const std::size_t kh = two_d ? s.kernel : 1, kw = s.kernel;
  const std::size_t sh = two_d ? s.stride : 1, sw = s.stride;
  const std::ptrdiff_t ph = two_d ? static_cast<std::ptrdiff_t>(s.kernel / 2) : 0;
  const std::ptrdiff_t pw = static_cast<std::ptrdiff_t>(s.kernel / 2);
  const std::size_t oh = two_d ? conv_out_length(in.height, s.kernel, s.stride) : in.height;
  const std::size_t ow = conv_out_length(in.width, s.kernel, s.stride);
  const std::size_t c_out = depthwise ? in.channels : s.c_out;
  Activation out{c_out, oh, ow, std::vector<double>(c_out * oh * ow, 0.0)};
  const std::size_t kk = kh * kw;
  for (std::size_t o = 0; o < c_out; ++o) {
    const std::size_t ci_lo = depthwise ? o : 0;
    const std::size_t ci_hi = depthwise ? o + 1 : in.channels;
    const double b = bias && !bias->values.empty() ? bias->values[o] : 0.0;
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = b;
        for (std::size_t ci = ci_lo; ci < ci_hi; ++ci) {
          const double* k = kernel.values.data() + (depthwise ? ci * kk : (o * in.channels + ci) * kk);
          for (std::size_t u = 0; u < kh; ++u) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * sh + u) - ph;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.height)) continue;
            for (std::size_t v = 0; v < kw; ++v) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * sw + v) - pw;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.width)) continue;
              acc += k[u * kw + v] * in.at(ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
        out.at(o, y, x) = acc;
      }
  }
  return out;
}

inline Activation pointwise_conv(const Activation& in, const Tensor& w, const Tensor& bias, std::size_t c_out) {
  const std::size_t hw = in.height * in.width;
  Activation out{c_out, in.height, in.width, std::vector<double>(c_out * hw, 0.0)};
  for (std::size_t o = 0; o < c_out; ++o) {
    double* dst = out.data.data() + o * hw;
    const double b = bias.values.empty() ? 0.0 : bias.values[o];
    for (std::size_t i = 0; i < hw; ++i) dst[i] = b;
    for (std::size_t c = 0; c < in.channels; ++c) {
      const double k = w.values[o * in.channels + c];
      const double* src = in.data.data() + c * hw;
      for (std::size_t i = 0; i < hw; ++i) dst[i] += k * src[i];
    }
  }
  return out;
}

}  // namespace detail

/// Runs the net on a feature stack. 1-D nets read the stack as C x (H*W).
/// Returns the flattened final activation.
inline std::vector<double> forward_cnn(const NetDescriptor& net, const NetWeights& weights,
                                       const FeatureMapStack& stack) {
  validate(net);
  require(weights.layers.size() == net.layers.size(), "forward_cnn: weights do not match the descriptor");
  if (stack.channels != net.input_channels)
    throw_invalid("forward_cnn: stack has " + std::to_string(stack.channels) + " channels, net expects " +
                  std::to_string(net.input_channels));
  const bool two_d = !net.layers.empty() && net.layers[0].conv.dims == 2;
  Activation a{stack.channels, two_d ? stack.height : 1, two_d ? stack.width : stack.height * stack.width,
               stack.data};

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const auto& s = l.conv;
    const auto& w = weights.layers[i];
    if (a.width < s.kernel || (two_d && a.height < s.kernel))
      throw_invalid("forward_cnn: layer " + std::to_string(i) + " input " + std::to_string(a.height) + "x" +
                    std::to_string(a.width) + " is smaller than its kernel " + std::to_string(s.kernel));
    if (s.kind == ConvKind::standard) {
      a = detail::spatial_conv(a, s, w.kernel, &w.kernel_bias, false);
    } else {
      a = detail::spatial_conv(a, s, w.kernel, &w.kernel_bias, true);
      a = detail::pointwise_conv(a, w.pointwise, w.pointwise_bias, s.c_out);
    }
    const std::size_t hw = a.height * a.width;
    if (l.batch_norm) {
      // Inference-mode batch norm with running statistics (0, 1).
      const double inv = 1.0 / std::sqrt(1.0 + kBnEps);
      for (std::size_t c = 0; c < a.channels; ++c)
        for (std::size_t k = 0; k < hw; ++k) {
          double& v = a.data[c * hw + k];
          v = w.bn_gamma.values[c] * v * inv + w.bn_beta.values[c];
        }
    }
    if (l.leaky_relu)
      for (double& v : a.data) v = v >= 0.0 ? v : kLeakySlope * v;
  }
  return a.data;
}

inline std::vector<double> forward_cnn(const NetDescriptor& net, const FeatureMapStack& stack, std::uint64_t seed,
                                       WeightInit init = WeightInit::uniform) {
  return forward_cnn(net, init_weights(net, seed, init), stack);
}

}  // namespace bwe::net
