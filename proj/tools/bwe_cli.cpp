// bwe: command-line front end.
//
//   bwe degrade  IN OUT --low-rate 8000
//   bwe features IN --extractor mrld --out-dir DIR
//   bwe compare  REF EST
//   bwe netinfo  {mrld|msdfa|generator} [--weights-out FILE]
//
// Global: --seed N, --config FILE (flat JSON; flags override file values).
// Exit status: 0 ok, 2 I/O failure, 3 usage / invalid argument.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bwe/bwe.hpp"

namespace fs = std::filesystem;
using bwe::json;

namespace {

constexpr int kExitIo = 2;
constexpr int kExitUsage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kConfigKeys{"seed",        "low_rate",  "encoding", "filter_half_width",
                                           "kaiser_beta", "rolloff",   "extractor", "out_dir",
                                           "side",        "weights_out"};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bwe::Error(bwe::ErrorKind::unreadable_file, "cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config " + path + ": expected a flat JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw UsageError("config " + path + ": unknown key '" + key + "'");
    if (value.is_object() || value.is_array()) throw UsageError("config " + path + ": '" + key + "' must be a scalar");
  }
  return doc;
}

// Fills `target` from the config file unless the flag was given explicitly.
template <typename T>
void merge(const json& cfg, const char* key, const CLI::Option* flag, T& target) {
  if (flag->count() > 0 || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw bwe::Error(bwe::ErrorKind::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw bwe::Error(bwe::ErrorKind::io_failure, "short write to " + path.string());
}

struct Options {
  std::uint64_t seed = 0;
  std::string config;

  std::string in, out, ref, est;
  int low_rate = 0;
  std::string encoding = "pcm16";
  bwe::ResampleConfig resample;

  std::string extractor;
  std::string out_dir;
  std::size_t side = 0;  // 0: extractor default

  std::string which;
  std::string weights_out;
};

bwe::ResampleConfig checked(const bwe::ResampleConfig& c) {
  bwe::validate(c);
  return c;
}

json cmd_degrade(const Options& o) {
  const auto wf = bwe::load_wav(o.in);
  const auto y = bwe::degrade(wf, o.low_rate, checked(o.resample));
  if (o.encoding != "pcm16" && o.encoding != "float32") throw UsageError("encoding must be pcm16 or float32");
  bwe::save_wav(o.out, y, o.encoding == "pcm16" ? bwe::WavEncoding::pcm16 : bwe::WavEncoding::float32);
  return {{"command", "degrade"},  {"input", o.in},        {"output", o.out},          {"rate", wf.rate},
          {"low_rate", o.low_rate}, {"samples", y.size()}, {"encoding", o.encoding}};
}

void write_channel(const fs::path& dir, const std::string& stem, const bwe::Grid<double>& g,
                   std::vector<std::string>& files) {
  bwe::write_grid_csv(dir / (stem + ".csv"), g);
  bwe::write_grid_f32(dir / (stem + ".f32"), g);
  files.push_back(stem + ".csv");
  files.push_back(stem + ".f32");
}

json cmd_features(const Options& o) {
  const auto wf = bwe::load_wav(o.in);
  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw bwe::Error(bwe::ErrorKind::io_failure, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> files;
  json meta;
  if (o.extractor == "mrad_mrpd") {
    const bwe::MultiResSpecConfig cfg;
    const auto res = bwe::mrad_mrpd_features(wf, cfg);
    json resolutions = json::array();
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto& r = res[i];
      write_channel(dir, "mag_r" + std::to_string(i), r.spec.mag, files);
      write_channel(dir, "phase_r" + std::to_string(i), r.spec.phase, files);
      resolutions.push_back({{"freq_bins", cfg.freq_bins[i]},
                             {"n_fft", r.stft.n_fft},
                             {"win_length", r.stft.win_length},
                             {"hop", r.stft.hop},
                             {"window_clamped", r.window_clamped},
                             {"shape", {r.spec.mag.rows(), r.spec.mag.cols()}}});
    }
    meta = {{"extractor", "mrad_mrpd"},
            {"log", "natural"},
            {"eps_mag", cfg.eps_mag},
            {"requested", {{"freq_bins", cfg.freq_bins}, {"hops", cfg.hops}, {"win_lengths", cfg.win_lengths}}},
            {"resolutions", resolutions}};
  } else {
    bwe::FeatureMapStack st;
    if (o.extractor == "mrld") {
      st = bwe::mrld_features(wf);
    } else if (o.extractor == "msdfa") {
      st = bwe::msdfa_features(wf, {100, 200, 300, 500, 600}, o.side ? o.side : 64);
    } else if (o.extractor == "rp") {
      st = bwe::recurrence_features(wf, {1, 2, 4, 8, 16}, o.side ? o.side : 256);
    } else if (o.extractor == "poincare") {
      st = bwe::poincare_features(wf);
    } else {
      throw UsageError("unknown extractor '" + o.extractor + "'");
    }
    for (std::size_t c = 0; c < st.channels; ++c) {
      bwe::Grid<double> g(st.height, st.width);
      const auto ch = st.channel(c);
      std::copy(ch.begin(), ch.end(), g.flat().begin());
      write_channel(dir, o.extractor + "_ch" + std::to_string(c), g, files);
    }
    meta = bwe::meta_json(st);
  }
  meta["input"] = {{"path", o.in}, {"rate", wf.rate}, {"samples", wf.size()}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  files.push_back("meta.json");
  return {{"command", "features"}, {"extractor", o.extractor}, {"out_dir", o.out_dir}, {"files", files}};
}

json cmd_compare(const Options& o) {
  const auto ref = bwe::load_wav(o.ref);
  const auto est = bwe::load_wav(o.est);
  return bwe::report_json(bwe::metrics::evaluate(ref, est));
}

json cmd_netinfo(const Options& o) {
  if (o.which == "generator") {
    const bwe::gen::GeneratorGraph g;
    auto doc = bwe::netinfo_json(g);
    if (!o.weights_out.empty()) {
      const auto w = bwe::gen::init_generator(g, o.seed);
      bwe::save_weights(o.weights_out, w.ordered());
      doc["weights"] = {{"path", o.weights_out}, {"seed", o.seed}};
    }
    return doc;
  }
  const auto net = o.which == "mrld" ? bwe::net::build_mrld_cnn() : bwe::net::build_msdfa_cnn();
  auto doc = bwe::netinfo_json(net);
  if (!o.weights_out.empty()) {
    const auto w = bwe::net::init_weights(net, o.seed);
    bwe::save_weights(o.weights_out, w.ordered());
    doc["weights"] = {{"path", o.weights_out}, {"seed", o.seed}};
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandwidth-extension analysis toolkit"};
  app.require_subcommand(1);
  Options o;
  auto* seed_flag = app.add_option("--seed", o.seed, "Seed for weight initialization");
  app.add_option("--config", o.config, "Flat JSON file of option values")->check(CLI::ExistingFile);

  auto* deg = app.add_subcommand("degrade", "Simulate a narrowband capture");
  deg->add_option("input", o.in, "Input WAV")->required();
  deg->add_option("output", o.out, "Output WAV")->required();
  auto* low_flag = deg->add_option("-r,--low-rate", o.low_rate, "Intermediate sample rate in Hz");
  auto* enc_flag = deg->add_option("--encoding", o.encoding, "pcm16 or float32");
  auto* hw_flag = deg->add_option("--filter-half-width", o.resample.filter_half_width);
  auto* beta_flag = deg->add_option("--kaiser-beta", o.resample.kaiser_beta);
  auto* roll_flag = deg->add_option("--rolloff", o.resample.rolloff);

  const std::vector<std::string> extractors{"mrld", "msdfa", "mrad_mrpd", "rp", "poincare"};
  auto* feat = app.add_subcommand("features", "Extract discriminator feature maps");
  feat->add_option("input", o.in, "Input WAV")->required();
  auto* ex_flag = feat->add_option("-e,--extractor", o.extractor)->check(CLI::IsMember(extractors));
  auto* dir_flag = feat->add_option("-o,--out-dir", o.out_dir, "Output directory");
  auto* side_flag = feat->add_option("--side", o.side, "Tile side for msdfa / rp");

  auto* cmp = app.add_subcommand("compare", "Objective metrics for a reference/estimate pair");
  cmp->add_option("reference", o.ref)->required();
  cmp->add_option("estimate", o.est)->required();

  auto* info = app.add_subcommand("netinfo", "Describe a network graph");
  info->add_option("which", o.which)->required()->check(CLI::IsMember({"mrld", "msdfa", "generator"}));
  auto* wout_flag = info->add_option("--weights-out", o.weights_out, "Write seeded initial weights here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    json cfg = json::object();
    if (!o.config.empty()) cfg = load_config(o.config);
    merge(cfg, "seed", seed_flag, o.seed);

    json result;
    if (deg->parsed()) {
      merge(cfg, "low_rate", low_flag, o.low_rate);
      merge(cfg, "encoding", enc_flag, o.encoding);
      merge(cfg, "filter_half_width", hw_flag, o.resample.filter_half_width);
      merge(cfg, "kaiser_beta", beta_flag, o.resample.kaiser_beta);
      merge(cfg, "rolloff", roll_flag, o.resample.rolloff);
      if (o.low_rate <= 0) throw UsageError("degrade: --low-rate is required and must be positive");
      result = cmd_degrade(o);
    } else if (feat->parsed()) {
      merge(cfg, "extractor", ex_flag, o.extractor);
      merge(cfg, "out_dir", dir_flag, o.out_dir);
      merge(cfg, "side", side_flag, o.side);
      if (std::find(extractors.begin(), extractors.end(), o.extractor) == extractors.end())
        throw UsageError("features: --extractor must be one of mrld, msdfa, mrad_mrpd, rp, poincare");
      if (o.out_dir.empty()) throw UsageError("features: --out-dir is required");
      result = cmd_features(o);
    } else if (cmp->parsed()) {
      result = cmd_compare(o);
    } else {
      merge(cfg, "weights_out", wout_flag, o.weights_out);
      result = cmd_netinfo(o);
    }
    std::cout << result.dump(2) << "\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bwe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == bwe::ErrorKind::invalid_argument ? kExitUsage : kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
