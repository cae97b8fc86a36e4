#include <catch_amalgamated.hpp>

#include "bwe/metrics.hpp"
#include "bwe/resample.hpp"
#include "bwe/wav.hpp"
#include "support.hpp"

using namespace bwe;
using namespace bwe::metrics;
using namespace testsupport;
using Catch::Matchers::WithinAbs;

namespace {

// Reference + orthogonal error with |e|^2 = 0.01 |ref|^2.
std::pair<Waveform, Waveform> orthogonal_pair(bool zero_mean) {
  auto r = white(20000, 1);
  auto e = white(20000, 2);
  if (zero_mean) {
    for (auto* v : {&r, &e}) {
      long double m = 0;
      for (double x : *v) m += x;
      m /= v->size();
      for (double& x : *v) x -= static_cast<double>(m);
    }
  }
  long double dot = 0, rr = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    dot += static_cast<long double>(e[i]) * r[i];
    rr += static_cast<long double>(r[i]) * r[i];
  }
  for (std::size_t i = 0; i < r.size(); ++i) e[i] -= static_cast<double>(dot / rr) * r[i];
  long double ee = 0;
  for (double x : e) ee += static_cast<long double>(x) * x;
  const double k = static_cast<double>(std::sqrt(0.01L * rr / ee));
  std::vector<double> est(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) est[i] = r[i] + k * e[i];
  return {{r, 16000}, {est, 16000}};
}

// Closed-form signals shared with tests/oracles/stoi_oracle.py.
struct StoiSignals {
  std::vector<double> ref, hum, buzz;
};

StoiSignals stoi_signals() {
  const std::size_t n = 12000;
  const double pi = std::numbers::pi;
  StoiSignals s;
  s.ref.resize(n);
  s.hum.resize(n);
  s.buzz.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 10000.0;
    const double gate = (t > 0.5 && t < 0.7) ? 0.0 : 1.0;
    const double r = gate * (std::sin(2 * pi * 440 * t) * (0.6 + 0.4 * std::sin(2 * pi * 3 * t)) +
                             0.5 * std::sin(2 * pi * 1250 * t + 0.3) * (0.5 + 0.5 * std::cos(2 * pi * 5 * t)) +
                             0.3 * std::sin(2 * pi * 2900 * t) * std::sin(2 * pi * 2 * t));
    const double hum = std::sin(2 * pi * 1700 * t) * std::sin(2 * pi * 7 * t);
    const double buzz = std::sin(2 * pi * (200 * t + 900 * t * t));
    s.ref[i] = r;
    s.hum[i] = r + 0.3 * hum;
    s.buzz[i] = 0.5 * r + 0.4 * buzz;
  }
  return s;
}

}  // namespace

TEST_CASE("LSD identities", "[lsd]") {
  const Waveform ref{white(48000, 3), 48000};
  CHECK(lsd(ref, ref) == 0.0);
  Waveform loud = ref;
  for (double& v : loud.samples) v *= 10.0;
  CHECK_THAT(lsd(ref, loud), WithinAbs(20.0, 1e-9));
  CHECK_THAT(lsd(loud, ref), WithinAbs(20.0, 1e-9));
  CHECK_THROWS_AS(lsd(ref, Waveform{ref.samples, 16000}), Error);
}

TEST_CASE("LSD truncates to the shorter signal", "[lsd]") {
  const auto x = white(30000, 4);
  const Waveform a{x, 16000};
  const Waveform b{{x.begin(), x.begin() + 20000}, 16000};
  CHECK(lsd(a, b) == 0.0);
}

TEST_CASE("SI-SDR and SI-SNR identities", "[sisdr]") {
  const Waveform ref{white(8000, 5), 16000};
  CHECK(si_sdr(ref, ref) == kRatioCapDb);
  CHECK(si_snr(ref, ref) == kRatioCapDb);

  const auto [r, est] = orthogonal_pair(false);
  CHECK_THAT(si_sdr(r, est), WithinAbs(20.0, 1e-6));
  const auto [rz, estz] = orthogonal_pair(true);
  CHECK_THAT(si_snr(rz, estz), WithinAbs(20.0, 1e-6));
  CHECK_THAT(si_sdr(rz, estz), WithinAbs(20.0, 1e-6));

  Waveform zero{std::vector<double>(100), 16000};
  CHECK_THROWS_AS(si_sdr(zero, ref), Error);
  CHECK_THROWS_AS(si_snr(Waveform{std::vector<double>(100, 0.5), 16000}, ref), Error);
}

TEST_CASE("SI-SDR scale invariance", "[sisdr]") {
  const auto [r, est] = orthogonal_pair(false);
  const double base = si_sdr(r, est);
  for (double c : {2.0, 0.5, 8.0}) {
    Waveform s = est;
    for (double& v : s.samples) v *= c;
    CHECK(si_sdr(r, s) == base);
    CHECK(si_snr(r, s) == si_snr(r, est));
  }
  for (double c : {3.0, 0.1, 123.456}) {
    Waveform s = est;
    for (double& v : s.samples) v *= c;
    CHECK_THAT(si_sdr(r, s), WithinAbs(base, 1e-12 * std::abs(base)));
  }
}

TEST_CASE("SI-SDR skips mean removal, SI-SNR applies it", "[sisdr]") {
  auto x = white(5000, 6);
  auto y = white(5000, 7);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 0.3 * y[i] + 1.0;
  const Waveform a{x, 16000}, b{y, 16000};
  // Direct long-double evaluation of both conventions.
  auto oracle = [&](bool centre) {
    long double mx = 0, my = 0;
    if (centre) {
      for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
      mx /= x.size();
      my /= y.size();
    }
    long double dot = 0, rr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += (y[i] - my) * (x[i] - mx), rr += (x[i] - mx) * (x[i] - mx);
    long double ts = 0, ns = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const long double s = dot / rr * (x[i] - mx);
      ts += s * s;
      ns += (y[i] - my - s) * (y[i] - my - s);
    }
    return static_cast<double>(10 * std::log10(ts / ns));
  };
  CHECK_THAT(si_sdr(a, b), WithinAbs(oracle(false), 1e-9));
  CHECK_THAT(si_snr(a, b), WithinAbs(oracle(true), 1e-9));
  CHECK(si_snr(a, b) > si_sdr(a, b));
}

TEST_CASE("STOI matches the reference implementation at 10 kHz", "[stoi]") {
  // Values from tests/oracles/stoi_oracle.py (pystoi 0.4.1).
  const auto s = stoi_signals();
  const Waveform ref{s.ref, 10000};
  CHECK_THAT(stoi(ref, ref), WithinAbs(1.0, 1e-9));
  CHECK_THAT(stoi(ref, {s.hum, 10000}), WithinAbs(0.878553699924, 1e-6));
  CHECK_THAT(stoi(ref, {s.buzz, 10000}), WithinAbs(0.733823200008, 1e-6));
}

TEST_CASE("STOI on speech", "[stoi]") {
  const auto speech = load_wav(BWE_TEST_DATA "/speech_48k.wav");
  CHECK(stoi(speech, speech) >= 0.999);
  double prev = 1.0;
  for (double sd : {0.01, 0.05, 0.2, 0.8}) {
    Waveform noisy = speech;
    const auto n = white(noisy.size(), 42, sd);
    for (std::size_t i = 0; i < n.size(); ++i) noisy.samples[i] += n[i];
    const double v = stoi(speech, noisy);
    INFO("noise sd " << sd << " -> " << v);
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("STOI preconditions", "[stoi]") {
  CHECK_THROWS_AS(stoi({white(8000, 1), 8000}, {white(8000, 2), 8000}), Error);
  CHECK_THROWS_AS(stoi({white(3000, 1), 10000}, {white(3000, 2), 10000}), Error);
  // Long enough but mostly silent: fewer than one 30-frame segment survives.
  std::vector<double> quiet(5000);
  for (std::size_t i = 0; i < 300; ++i) quiet[i] = std::sin(0.3 * i);
  CHECK(stoi({quiet, 10000}, {quiet, 10000}) == kStoiDegenerate);
}

TEST_CASE("evaluate fills every field", "[report]") {
  const auto speech = load_wav(BWE_TEST_DATA "/speech_48k.wav");
  const auto est = degrade(speech, 8000);
  const auto r = evaluate(speech, est);
  for (double v : {r.lsd, r.si_sdr, r.si_snr, r.stoi}) CHECK(std::isfinite(v));
  CHECK(r.rate == 48000);
  CHECK(r.samples == speech.size());
  CHECK(r.lsd > 0.0);
  CHECK(r.stoi > 0.5);
}
