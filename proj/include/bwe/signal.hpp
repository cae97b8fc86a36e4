#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"

namespace bwe {

/// Mono waveform. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int rate = 0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0; }
};

inline void validate(const Waveform& wf) {
  require(wf.rate > 0, "waveform rate must be positive");
  for (double s : wf.samples)
    if (!std::isfinite(s)) throw_invalid("waveform contains non-finite samples");
}

/// Splits x into windows of `size` samples every `hop` samples. A trailing
/// remainder shorter than `size` is dropped. The spans alias x.
inline std::vector<std::span<const double>> frame(std::span<const double> x, std::size_t size, std::size_t hop) {
  require(size >= 1 && hop >= 1, "frame: size and hop must be >= 1");
  std::vector<std::span<const double>> out;
  if (x.size() < size) return out;
  const std::size_t count = (x.size() - size) / hop + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(x.subspan(i * hop, size));
  return out;
}

inline std::vector<std::span<const double>> frame(const Waveform& wf, std::size_t size, std::size_t hop) {
  return frame(std::span<const double>(wf.samples), size, hop);
}

}  // namespace bwe
