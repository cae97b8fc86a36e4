// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>

#include "bwe/bwe.hpp"
#include "support.hpp"

using namespace bwe;
using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int run(int id, const char* name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  std::printf("%s %d. %s:%s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

std::pair<double, double> mean_var(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size())};
}

void lyapunov(Outcome& o) {
  const auto t0 = Clock::now();
  const double ln2 = std::log(2.0);
  const double lam_log = nld::local_lyapunov(logistic(4096), {1, 1, 1, 1e-8, 1}).lambda;
  const double lam_sin = nld::local_lyapunov(sine(2048, 1.0, 50.3), {3, 1, 1, 1e-8, 3}).lambda;
  const double lam_const = nld::local_lyapunov(std::vector<double>(2048, 0.6), {}).lambda;
  const double secs = seconds_since(t0);
  o.detail << " logistic=" << lam_log << " (ln2=" << ln2 << "), sine=" << lam_sin << ", constant=" << lam_const
           << ", " << secs << " s";
  o.check(std::abs(lam_log - ln2) <= 0.10 * ln2, "logistic within 10% of ln 2");
  o.check(std::abs(lam_sin) < 0.05, "|sine| < 0.05");
  o.check(lam_const == 0.0, "constant == 0");
  o.check(secs < 5.0, "runtime < 5 s");
}

void dfa(Outcome& o) {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> scales{100, 200, 300, 500, 600};
  double aw = 0.0, ab = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    aw += nld::dfa_exponent(white(16384, seed), scales).alpha;
    auto b = white(16384, 1000 + seed);
    for (std::size_t i = 1; i < b.size(); ++i) b[i] += b[i - 1];
    ab += nld::dfa_exponent(b, scales).alpha;
  }
  aw /= 20.0;
  ab /= 20.0;
  double fmax = 0.0;
  for (double c : {0.0, 1.0, -2.5, 0.1})
    for (std::size_t n : scales) fmax = std::max(fmax, nld::dfa_fluctuation(std::vector<double>(4096, c), n));
  const double secs = seconds_since(t0);
  o.detail << " white alpha=" << aw << ", brownian alpha=" << ab << ", max F(n) on constants=" << fmax << ", "
           << secs << " s";
  o.check(std::abs(aw - 0.5) <= 0.05, "white 0.50 +- 0.05");
  o.check(std::abs(ab - 1.5) <= 0.1, "brownian 1.5 +- 0.1");
  o.check(fmax == 0.0, "constant input F(n) == 0");
  o.check(secs < 10.0, "runtime < 10 s");
}

void spectral_round_trip(Outcome& o) {
  std::mt19937_64 gen(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t win = trial % 2 ? 512 : 1024;
    const auto cfg = StftConfig::make(win, win, win / 4);
    const std::size_t n = 4096 + gen() % 8192;
    const auto x = white(n, gen());
    const auto y = istft(stft(x, cfg));
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = y.samples[i] - x[i];
    worst = std::max(worst, rms(d, win, n - win) / rms(x, win, n - win));
  }
  const auto s = stft(white(20000, 3), StftConfig{});
  const auto back = synthesize(to_mag_phase(s));
  double floor_excess = 0.0;
  for (std::size_t i = 0; i < s.data.flat().size(); ++i) {
    const auto z = s.data.flat()[i];
    floor_excess = std::max(floor_excess, std::abs(back.data.flat()[i] - z) - s.config.eps_mag - 1e-6 * std::abs(z));
  }
  std::normal_distribution<double> nd;
  Grid<double> re(1000, 1000), im(1000, 1000);
  for (std::size_t k = 0; k < re.size(); ++k) {
    re.flat()[k] = nd(gen);
    im.flat()[k] = nd(gen);
  }
  re.flat()[0] = -1.0;
  im.flat()[0] = -0.0;
  const auto phases = phase_from_ri(re, im);
  std::size_t out_of_range = 0;
  for (double p : phases.flat()) out_of_range += !(p > -std::numbers::pi && p <= std::numbers::pi);
  o.detail << " worst round-trip rel RMS=" << worst << ", synth excess over floor=" << floor_excess
           << ", phases out of (-pi, pi]=" << out_of_range << "/1000000";
  o.check(worst < 1e-6, "round trip < 1e-6");
  o.check(floor_excess <= 0.0, "synthesize(to_mag_phase) within eps floor");
  o.check(out_of_range == 0, "phase range");
}

void metric_identities(Outcome& o) {
  const auto r = white(20000, 1);
  auto e = white(20000, 2);
  long double dot = 0, rr = 0, ee = 0;
  for (std::size_t i = 0; i < r.size(); ++i) dot += static_cast<long double>(e[i]) * r[i], rr += static_cast<long double>(r[i]) * r[i];
  for (std::size_t i = 0; i < r.size(); ++i) e[i] -= static_cast<double>(dot / rr) * r[i];
  for (double v : e) ee += static_cast<long double>(v) * v;
  const double k = static_cast<double>(std::sqrt(0.01L * rr / ee));
  std::vector<double> est(r.size()), est2(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    est[i] = r[i] + k * e[i];
    est2[i] = 2.0 * est[i];
  }
  const Waveform ref{r, 16000};
  const double orth = metrics::si_sdr(ref, {est, 16000});
  const double scaled = metrics::si_sdr(ref, {est2, 16000});
  const bool scale_exact = scaled == orth;
  auto loud = r;
  for (double& v : loud) v *= 10.0;
  const double l = metrics::lsd(ref, {loud, 16000});
  const auto speech = load_wav(BWE_TEST_DATA "/speech_48k.wav");
  const double st = metrics::stoi(speech, speech);
  o.detail << " orthogonal si_sdr=" << std::setprecision(10) << orth << ", lsd(ref,10ref)=" << l
           << ", stoi(ref,ref)=" << st << ", scale invariance exact=" << (scale_exact ? "yes" : "no");
  o.check(scale_exact, "si_sdr scale invariance exact");
  o.check(std::abs(orth - 20.0) <= 1e-6, "orthogonal case 20 dB");
  o.check(std::abs(l - 20.0) <= 1e-9, "lsd 20 dB");
  o.check(st >= 0.999, "stoi(ref, ref) >= 0.999");
}

void unprocessed_direction(Outcome& o) {
  const auto speech = load_wav(BWE_TEST_DATA "/speech_48k.wav");
  o.check(speech.rate == 48000 && speech.duration() >= 3.0, "48 kHz clip of at least 3 s");
  double lsd_v[3], stoi_v[3];
  const int rates[3] = {4000, 8000, 16000};
  for (int i = 0; i < 3; ++i) {
    const auto est = degrade(speech, rates[i]);
    lsd_v[i] = metrics::lsd(speech, est);
    stoi_v[i] = metrics::stoi(speech, est);
    o.detail << " " << rates[i] / 1000 << "k: lsd=" << lsd_v[i] << " stoi=" << stoi_v[i] << ";";
  }
  o.check(lsd_v[0] > lsd_v[1] && lsd_v[1] > lsd_v[2], "LSD strictly decreasing");
  o.check(stoi_v[0] < stoi_v[1] && stoi_v[1] < stoi_v[2], "STOI strictly increasing");
}

void parameter_accounting(Outcome& o) {
  const auto mrld = net::param_count(net::build_mrld_cnn());
  const auto msdfa = net::param_count(net::build_msdfa_cnn());
  const double combined_ratio = 22'000'000.0 / static_cast<double>(mrld + msdfa);
  const net::ConvSpec s{net::ConvKind::depthwise_separable, 2, 5, 128, 128, 1, true};
  const double dsc = static_cast<double>(net::conv_params(net::as_standard(s))) / net::conv_params(s);
  o.detail << " mrld=" << mrld << ", msdfa=" << msdfa << ", 22M/combined=" << combined_ratio
           << "x, DSC ratio (2-D K=5, 128ch)=" << dsc;
  o.check(std::abs(static_cast<double>(mrld) - 235500.0) <= 0.15 * 235500.0, "mrld within 15%");
  o.check(std::abs(static_cast<double>(msdfa) - 247700.0) <= 0.15 * 247700.0, "msdfa within 15%");
  o.check(combined_ratio >= 30.0, "combined >= 30x below 22M");
  o.check(dsc >= 20.0, "DSC ratio >= 20");
}

void generator_invariants(Outcome& o) {
  auto make_input = [](std::size_t f, std::size_t t) {
    MagPhase mp{Grid<double>(f, t), Grid<double>(f, t), StftConfig::make(2 * (f - 1), 2 * (f - 1), (f - 1) / 2), 0,
                16000};
    const auto a = white(f * t, 1), b = white(f * t, 2);
    for (std::size_t i = 0; i < f * t; ++i) {
      mp.mag.flat()[i] = a[i];
      mp.phase.flat()[i] = std::atan2(b[i], a[i]);
    }
    return mp;
  };

  gen::GeneratorGraph g;
  g.lattice = {0.0, 0.0, 0.0, 0.0};
  const auto w = gen::init_generator(g, 5);
  const auto nb = make_input(257, 16);
  const auto out = gen::generator_forward(g, w, nb);
  using gen::conformernext_forward;
  auto m = gen::linear(gen::transpose(nb.mag), w.mag_in);
  auto p = gen::linear(gen::transpose(nb.phase), w.phase_in);
  m = conformernext_forward(conformernext_forward(m, w.blocks[0], g.blocks[0]), w.blocks[2], g.blocks[2]);
  p = conformernext_forward(conformernext_forward(p, w.blocks[1], g.blocks[1]), w.blocks[3], g.blocks[3]);
  const auto res = gen::linear(gen::layer_norm(m, w.mag_norm), w.mag_proj);
  const auto pn = gen::layer_norm(p, w.phase_norm);
  const auto re = gen::linear(pn, w.real_proj), im = gen::linear(pn, w.imag_proj);
  bool identical = true;
  for (std::size_t f = 0; f < 257; ++f)
    for (std::size_t t = 0; t < 16; ++t)
      identical &= out.mag(f, t) == nb.mag(f, t) + res(t, f) && out.phase(f, t) == principal_angle(im(t, f), re(t, f));

  const auto zero = gen::generator_forward(gen::GeneratorGraph{}, nb, 1, net::WeightInit::zeros);
  bool passthrough = zero.mag == nb.mag;
  for (double v : zero.phase.flat()) passthrough &= v == 0.0;

  const gen::GeneratorGraph dflt;
  const auto big = make_input(257, 64);
  const auto wd = gen::init_generator(dflt, 1);
  const auto t0 = Clock::now();
  const auto y = gen::generator_forward(dflt, wd, big);
  const double secs = seconds_since(t0);
  o.detail << " zero-gate streams bit-identical=" << (identical ? "yes" : "no")
           << ", zero-weight passthrough=" << (passthrough ? "yes" : "no") << ", F=257 T=64 forward " << secs
           << " s";
  o.check(identical, "zero gates give independent streams");
  o.check(passthrough, "zero weights pass magnitude, zero phase");
  o.check(y.mag.rows() == 257 && y.mag.cols() == 64, "output shape");
  o.check(secs < 1.0, "forward < 1 s");
}

void feature_contracts(Outcome& o) {
  const auto st = mrld_features({logistic(6000, 0.41), 16000});
  double worst_mean = 0.0, worst_var = 0.0;
  std::size_t live = 0;
  for (std::size_t c = 0; c < st.channels; ++c) {
    if (st.meta.degenerate[c]) continue;
    const auto [m, v] = mean_var(st.channel(c).first(st.meta.valid_width[c]));
    if (v == 0.0) continue;
    ++live;
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_var = std::max(worst_var, std::abs(v - 1.0));
  }
  o.check(st.channels == 5 && live == 5, "5 normalized MRLD channels");
  o.check(worst_mean < 1e-9, "channel mean < 1e-9");
  o.check(worst_var <= 1e-6, "channel variance within 1e-6 of 1");

  const auto x = white(4000, 9);
  const auto ms = msdfa_features({x, 16000}, {100, 200, 300, 500, 600}, 64);
  bool constant = ms.channels == 5 && ms.height == 64 && ms.width == 64;
  for (std::size_t c = 0; c < ms.channels; ++c)
    for (double v : ms.channel(c)) constant &= v == ms.channel(c)[0];
  o.check(constant, "MSDFA 5x64x64 constant per channel");

  const MrldConfig cfg;
  std::vector<std::vector<double>> chaos(5), noise(5);
  for (int r = 0; r < 8; ++r) {
    const auto a = mrld_exponents(logistic(5120, 0.1 + 0.07 * r), cfg);
    const auto b = mrld_exponents(white(5120, 500 + r), cfg);
    for (std::size_t c = 0; c < 5; ++c) {
      chaos[c].push_back(mean_var(a[c]).first);
      noise[c].push_back(mean_var(b[c]).first);
    }
  }
  double weakest = 1e300;
  for (std::size_t c = 0; c < 5; ++c) {
    const auto [ma, va] = mean_var(chaos[c]);
    const auto [mb, vb] = mean_var(noise[c]);
    weakest = std::min(weakest, std::abs(ma - mb) / std::sqrt((va + vb) / 2.0));
  }
  o.detail << " max |mean|=" << worst_mean << ", max |var-1|=" << worst_var
           << ", weakest chaos/noise separation=" << weakest << " pooled SD";
  o.check(weakest > 3.0, "separation > 3 pooled SD");
}

void nld_identities(Outcome& o) {
  std::mt19937_64 gen(123);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 3 + gen() % 2000;
    const auto x = white(n, gen(), 0.1 + (gen() % 100));
    const auto pd = nld::poincare_sd(x);
    if (pd.clamped) continue;
    const double var = nld::detail::population_variance(x);
    worst = std::max(worst, std::abs(pd.sd1 * pd.sd1 + pd.sd2 * pd.sd2 - 2.0 * var) / (2.0 * var));
  }
  bool rp_ok = true;
  for (int i = 0; i < 100; ++i) {
    const auto x = white(2 + gen() % 600, gen());
    const auto rp = nld::recurrence_plot(x, 256);
    for (std::size_t a = 0; a < rp.size; ++a) {
      rp_ok &= rp(a, a) == 1;
      for (std::size_t b = 0; b < a; ++b) rp_ok &= rp(a, b) == rp(b, a);
    }
  }
  o.detail << " worst Poincare identity rel error=" << worst << ", recurrence symmetric+unit diagonal="
           << (rp_ok ? "yes" : "no");
  o.check(worst <= 1e-9, "sd1^2 + sd2^2 == 2 Var(x)");
  o.check(rp_ok, "recurrence plots symmetric with unit diagonal");
}

}  // namespace

int main() {
  int failures = 0;
  failures += run(1, "Lyapunov oracle", lyapunov);
  failures += run(2, "DFA oracle", dfa);
  failures += run(3, "Spectral round trip", spectral_round_trip);
  failures += run(4, "Metric identities", metric_identities);
  failures += run(5, "Unprocessed-row direction", unprocessed_direction);
  failures += run(6, "Parameter accounting", parameter_accounting);
  failures += run(7, "Generator graph invariants", generator_invariants);
  failures += run(8, "Feature-map contracts", feature_contracts);
  failures += run(9, "Poincare and recurrence identities", nld_identities);
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
