#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bwe/signal.hpp"

namespace testsupport {

inline std::vector<double> sine(std::size_t n, double freq, double rate, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate + phase);
  return x;
}

inline std::vector<double> white(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(gen);
  return x;
}

inline std::vector<double> logistic(std::size_t n, double x0 = 0.1234, double r = 4.0) {
  std::vector<double> x(n);
  double v = x0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = v;
    v = r * v * (1.0 - v);
  }
  return x;
}

inline double rms(const std::vector<double>& x, std::size_t lo = 0, std::size_t hi = 0) {
  if (hi == 0) hi = x.size();
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(hi - lo));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Textbook O(n^2) DFT power, used as an oracle independent of the FFT.
inline std::vector<double> dft_power(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      re += x[t] * std::cos(a);
      im += x[t] * std::sin(a);
    }
    p[k] = re * re + im * im;
  }
  return p;
}

inline bwe::Waveform wave(std::vector<double> x, int rate) { return {std::move(x), rate}; }

}  // namespace testsupport
