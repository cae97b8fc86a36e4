#pragma once

// Nonlinear time-series estimators: delay embedding, local Lyapunov exponents
// from nearest-neighbour divergence, detrended fluctuation analysis (DFA-1),
// recurrence plots and Poincare descriptors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"

namespace bwe::nld {

struct EmbeddingParams {
  std::size_t dim = 3;
  std::size_t tau = 1;
  std::size_t delta = 1;  // divergence horizon in samples
  double eps = 1e-8;
  std::size_t theiler = 3;  // neighbours must satisfy |j - j'| > theiler

  /// Defaults used for a window of w samples: delta = max(1, w / 8),
  /// theiler = dim * tau.
  static EmbeddingParams for_window(std::size_t w, std::size_t dim = 3, std::size_t tau = 1) {
    return {dim, tau, std::max<std::size_t>(1, w / 8), 1e-8, dim * tau};
  }
};

/// Delay-embedded point cloud; point j is (x[j], x[j+tau], ..., x[j+(d-1)tau]).
class Embedding {
 public:
  Embedding(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::span<const double> point(std::size_t j) const { return {coords_.data() + j * dim_, dim_}; }

  double distance(std::size_t a, std::size_t b) const {
    double s = 0.0;
    const double* pa = coords_.data() + a * dim_;
    const double* pb = coords_.data() + b * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = pa[k] - pb[k];
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

inline Embedding delay_embed(std::span<const double> x, std::size_t dim, std::size_t tau) {
  require(dim >= 1 && tau >= 1, "delay_embed: dim and tau must be >= 1");
  const std::size_t span = (dim - 1) * tau;
  if (x.size() < span + 1)
    throw_invalid("delay_embed: " + std::to_string(x.size()) + " samples cannot hold one point with d=" +
                  std::to_string(dim) + ", tau=" + std::to_string(tau));
  const std::size_t count = x.size() - span;
  std::vector<double> coords(count * dim);
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t k = 0; k < dim; ++k) coords[j * dim + k] = x[j + k * tau];
  return Embedding(dim, std::move(coords));
}

struct LyapunovEstimate {
  double lambda = 0.0;  // mean log-divergence rate, 1/sample
  std::size_t pairs = 0;
  bool degenerate = false;  // no admissible neighbour pair; lambda is 0
};

/// Local Lyapunov exponent of a segment. For every reference point j with
/// j + delta in range, the nearest neighbour j' (Euclidean, |j - j'| >
/// theiler, j' + delta in range) is found by exhaustive search and the rate
/// log((|y[j+D] - y[j'+D]| + eps) / (|y[j] - y[j']| + eps)) / D is averaged.
inline LyapunovEstimate local_lyapunov(std::span<const double> segment, const EmbeddingParams& p) {
  require(p.delta >= 1, "local_lyapunov: delta must be >= 1");
  require(p.eps > 0.0, "local_lyapunov: eps must be positive");
  LyapunovEstimate out;
  const std::size_t span = (p.dim - 1) * p.tau;
  if (segment.size() < span + 1 + p.delta) {
    out.degenerate = true;
    return out;
  }
  const Embedding y = delay_embed(segment, p.dim, p.tau);
  const std::size_t usable = y.size() - p.delta;  // indices whose future point exists

  double sum = 0.0;
  for (std::size_t j = 0; j < usable; ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t nn = usable;
    for (std::size_t k = 0; k < usable; ++k) {
      const std::size_t gap = j > k ? j - k : k - j;
      if (gap <= p.theiler) continue;
      const double d = y.distance(j, k);
      if (d < best) {
        best = d;
        nn = k;
      }
    }
    if (nn == usable) continue;
    const double later = y.distance(j + p.delta, nn + p.delta);
    sum += std::log((later + p.eps) / (best + p.eps)) / static_cast<double>(p.delta);
    ++out.pairs;
  }
  if (out.pairs == 0) {
    out.degenerate = true;
    return out;
  }
  out.lambda = sum / static_cast<double>(out.pairs);
  return out;
}

namespace detail {

/// x - mean(x) where the mean is accumulated relative to x[0], so a constant
/// input centres to exact zeros.
inline std::vector<double> centered(std::span<const double> x) {
  std::vector<double> c(x.size());
  if (x.empty()) return c;
  const double anchor = x[0];
  double s = 0.0;
  for (double v : x) s += v - anchor;
  const double shift = s / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = (x[i] - anchor) - shift;
  return c;
}

inline double population_variance(std::span<const double> x) {
  const auto c = centered(x);
  double s = 0.0;
  for (double v : c) s += v * v;
  return s / static_cast<double>(x.size());
}

}  // namespace detail

/// Integrated, mean-removed profile used by DFA.
inline std::vector<double> dfa_profile(std::span<const double> x) {
  auto y = detail::centered(x);
  double run = 0.0;
  for (double& v : y) {
    run += v;
    v = run;
  }
  return y;
}

namespace detail {

inline double fluctuation_from_profile(std::span<const double> y, std::size_t n) {
  const std::size_t boxes = y.size() / n;
  const double mid = (static_cast<double>(n) - 1.0) / 2.0;
  double tt = 0.0;
  for (std::size_t i = 0; i < n; ++i) tt += (i - mid) * (i - mid);
  double total = 0.0;
  for (std::size_t b = 0; b < boxes; ++b) {
    const double* seg = y.data() + b * n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += seg[i];
    mean /= static_cast<double>(n);
    double ty = 0.0;
    for (std::size_t i = 0; i < n; ++i) ty += (i - mid) * (seg[i] - mean);
    const double slope = tt > 0.0 ? ty / tt : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = seg[i] - mean - slope * (i - mid);
      ss += r * r;
    }
    total += ss / static_cast<double>(n);
  }
  return std::sqrt(total / static_cast<double>(boxes));
}

}  // namespace detail

/// DFA-1 fluctuation F(n): RMS of linear-detrended profile residuals over
/// floor(len / n) non-overlapping boxes.
inline double dfa_fluctuation(std::span<const double> x, std::size_t n) {
  require(n >= 2, "dfa_fluctuation: scale must be >= 2");
  if (x.size() < 2 * n)
    throw_invalid("dfa_fluctuation: need at least " + std::to_string(2 * n) + " samples for scale " +
                  std::to_string(n));
  const auto y = dfa_profile(x);
  return detail::fluctuation_from_profile(y, n);
}

struct DfaProfile {
  std::vector<std::size_t> scales;
  std::vector<double> fluctuations;
};

struct DfaFit {
  DfaProfile profile;
  double alpha = 0.0;
  std::vector<bool> excluded;  // scales whose F(n) was zero and left out of the fit
};

inline DfaProfile dfa_fluctuations(std::span<const double> x, std::span<const std::size_t> scales) {
  DfaProfile prof;
  const auto y = dfa_profile(x);
  for (std::size_t n : scales) {
    require(n >= 2, "dfa: scale must be >= 2");
    if (x.size() < 2 * n) throw_invalid("dfa: scale " + std::to_string(n) + " too large for the signal");
    prof.scales.push_back(n);
    prof.fluctuations.push_back(detail::fluctuation_from_profile(y, n));
  }
  return prof;
}

/// Least-squares slope of log F(n) against log n.
inline DfaFit dfa_exponent(std::span<const double> x, std::span<const std::size_t> scales) {
  require(scales.size() >= 2, "dfa_exponent: need at least two scales");
  DfaFit fit;
  fit.profile = dfa_fluctuations(x, scales);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const bool zero = !(fit.profile.fluctuations[i] > 0.0);
    fit.excluded.push_back(zero);
    if (zero) continue;
    lx.push_back(std::log(static_cast<double>(scales[i])));
    ly.push_back(std::log(fit.profile.fluctuations[i]));
  }
  if (lx.size() < 2) throw_invalid("dfa_exponent: fewer than two scales with nonzero fluctuation");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw_invalid("dfa_exponent: scales must be distinct");
  fit.alpha = sxy / sxx;
  return fit;
}

/// Binary N x N recurrence matrix, row-major.
struct RecurrencePlot {
  std::size_t size = 0;
  std::vector<std::uint8_t> matrix;
  double threshold = 0.0;
  std::size_t stride = 1;  // decimation applied before thresholding

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return matrix[i * size + j]; }
};

/// R_ij = [|x_i - x_j| < eps_s] with eps_s the mean of the strict upper
/// triangle of the distance matrix; the diagonal is always 1. Inputs longer
/// than max_size are decimated by the smallest uniform stride that fits.
inline RecurrencePlot recurrence_plot(std::span<const double> x, std::size_t max_size) {
  require(x.size() >= 2, "recurrence_plot: need at least two samples");
  require(max_size >= 2, "recurrence_plot: max_size must be >= 2");
  RecurrencePlot rp;
  rp.stride = (x.size() + max_size - 1) / max_size;
  std::vector<double> v;
  for (std::size_t i = 0; i < x.size(); i += rp.stride) v.push_back(x[i]);
  const std::size_t n = v.size();
  rp.size = n;
  rp.matrix.assign(n * n, 0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += std::abs(v[i] - v[j]);
  rp.threshold = n > 1 ? sum / (static_cast<double>(n) * (n - 1) / 2.0) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rp.matrix[i * n + i] = 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint8_t r = std::abs(v[i] - v[j]) < rp.threshold ? 1 : 0;
      rp.matrix[i * n + j] = r;
      rp.matrix[j * n + i] = r;
    }
  }
  return rp;
}

struct PoincareDescriptors {
  double sd1 = 0.0;
  double sd2 = 0.0;
  bool clamped = false;  // SD2 radicand was negative by rounding and set to 0
};

/// SD1 = sqrt(Var(dx) / 2), SD2 = sqrt(2 Var(x) - Var(dx) / 2), population
/// variances, dx the first difference.
inline PoincareDescriptors poincare_sd(std::span<const double> x) {
  require(x.size() >= 3, "poincare_sd: need at least three samples");
  std::vector<double> dx(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) dx[i] = x[i + 1] - x[i];
  const double var_x = detail::population_variance(x);
  const double var_dx = detail::population_variance(dx);
  PoincareDescriptors pd;
  pd.sd1 = std::sqrt(var_dx / 2.0);
  double rad = 2.0 * var_x - var_dx / 2.0;
  if (rad < 0.0) {
    rad = 0.0;
    pd.clamped = true;
  }
  pd.sd2 = std::sqrt(rad);
  return pd;
}

}  // namespace bwe::nld
