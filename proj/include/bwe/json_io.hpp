#pragma once

// JSON views of library objects and the float32 weight blob + JSON sidecar.
// Reported floating-point values are rounded to 6 significant digits so that
// repeated runs print byte-identical documents.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bwe/error.hpp"
#include "bwe/export.hpp"
#include "bwe/featmaps.hpp"
#include "bwe/generator.hpp"
#include "bwe/metrics.hpp"
#include "bwe/netshape.hpp"

namespace bwe {

using json = nlohmann::json;

inline double round6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

inline json netinfo_json(const net::NetDescriptor& netd) {
  json layers = json::array();
  for (const auto& l : netd.layers) {
    const auto& s = l.conv;
    layers.push_back({{"kind", net::to_string(s.kind)},
                      {"dims", s.dims},
                      {"kernel", s.kernel},
                      {"stride", s.stride},
                      {"c_in", s.c_in},
                      {"c_out", s.c_out},
                      {"bias", s.bias},
                      {"batch_norm", l.batch_norm},
                      {"leaky_relu", l.leaky_relu},
                      {"params", net::layer_params(l)}});
  }
  std::vector<std::size_t> widths;
  for (const auto& l : netd.layers) widths.push_back(l.conv.c_out);
  return {{"name", netd.name},
          {"input_channels", netd.input_channels},
          {"widths", widths},
          {"layers", layers},
          {"total_params", net::param_count(netd)},
          {"dsc_reduction_ratio", round6(net::dsc_reduction_ratio(netd))}};
}

inline json netinfo_json(const gen::GeneratorGraph& g) {
  const auto w = gen::generator_layout(g);
  auto count = [](std::initializer_list<const net::Tensor*> ts) {
    std::size_t n = 0;
    for (const auto* t : ts) n += t->values.size();
    return n;
  };
  auto lin = [](const gen::Linear& l) { return l.weight.values.size() + l.bias.values.size(); };
  json layers = json::array();
  layers.push_back({{"kind", "linear"}, {"name", "mag_in"}, {"in", g.freq_bins}, {"out", g.hidden}, {"params", lin(w.mag_in)}});
  layers.push_back(
      {{"kind", "linear"}, {"name", "phase_in"}, {"in", g.freq_bins}, {"out", g.hidden}, {"params", lin(w.phase_in)}});
  const char* roles[4] = {"lattice1.magnitude", "lattice1.phase", "lattice2.magnitude", "lattice2.phase"};
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t n = 0;
    gen::GeneratorWeights::visit(w, [&](const net::Tensor& t) {
      if (t.name.starts_with("block" + std::to_string(i) + ".")) n += t.values.size();
    });
    layers.push_back({{"kind", "conformernext"},
                      {"name", roles[i]},
                      {"hidden", g.hidden},
                      {"heads", g.blocks[i].heads},
                      {"mlp_expansion", g.blocks[i].mlp_expansion},
                      {"conv_kernel", g.blocks[i].conv_kernel},
                      {"params", n}});
  }
  layers.push_back({{"kind", "head"},
                    {"name", "magnitude_residual"},
                    {"params", count({&w.mag_norm.gamma, &w.mag_norm.beta}) + lin(w.mag_proj)}});
  layers.push_back({{"kind", "head"},
                    {"name", "phase_real_imag"},
                    {"params", count({&w.phase_norm.gamma, &w.phase_norm.beta}) + lin(w.real_proj) + lin(w.imag_proj)}});
  return {{"name", "generator"},
          {"freq_bins", g.freq_bins},
          {"hidden", g.hidden},
          {"conformernext_blocks", g.blocks.size()},
          {"heads", g.blocks[0].heads},
          {"mlp_expansion", g.blocks[0].mlp_expansion},
          {"lattice_stages", 2},
          {"lattice", {{"alpha1", g.lattice.alpha1}, {"alpha2", g.lattice.alpha2}, {"beta1", g.lattice.beta1}, {"beta2", g.lattice.beta2}}},
          {"layers", layers},
          {"total_params", w.count()},
          {"dsc_reduction_ratio", nullptr}};
}

inline json report_json(const metrics::MetricReport& r) {
  return {{"lsd", round6(r.lsd)},
          {"si_sdr", round6(r.si_sdr)},
          {"si_snr", round6(r.si_snr)},
          {"stoi", round6(r.stoi)},
          {"config",
           {{"rate", r.rate},
            {"samples", r.samples},
            {"lsd", {{"n_fft", r.lsd_config.n_fft}, {"hop", r.lsd_config.hop}, {"window", "hann"}, {"log", "10*log10 power"}, {"eps", r.lsd_config.eps}}},
            {"si_sdr", {{"mean_removed", false}, {"cap_db", metrics::kRatioCapDb}}},
            {"si_snr", {{"mean_removed", true}, {"cap_db", metrics::kRatioCapDb}}},
            {"stoi",
             {{"rate", r.stoi_config.rate},
              {"frame", r.stoi_config.frame},
              {"n_fft", r.stoi_config.n_fft},
              {"bands", r.stoi_config.bands},
              {"min_freq", r.stoi_config.min_freq},
              {"segment", r.stoi_config.segment},
              {"beta_db", r.stoi_config.beta_db},
              {"dynamic_range_db", r.stoi_config.dynamic_range_db}}}}}};
}

inline json meta_json(const FeatureMapStack& st) {
  std::vector<bool> degenerate(st.meta.degenerate.begin(), st.meta.degenerate.end());
  return {{"extractor", st.meta.extractor},
          {"shape", {st.channels, st.height, st.width}},
          {"channel_scale", st.meta.channel_scale},
          {"valid_width", st.meta.valid_width},
          {"degenerate", degenerate},
          {"normalized", st.meta.normalized},
          {"notes", st.meta.notes}};
}

// ---------------------------------------------------------------------------
// Weight files: <path> holds the tensors as consecutive little-endian float32
// values; <path>.json lists {"tensors": [{"name", "shape"}]} in blob order.

inline std::filesystem::path sidecar_path(const std::filesystem::path& blob) {
  auto p = blob;
  p += ".json";
  return p;
}

inline void save_weights(const std::filesystem::path& blob, const std::vector<const net::Tensor*>& tensors) {
  std::vector<unsigned char> bytes;
  json list = json::array();
  for (const auto* t : tensors) {
    list.push_back({{"name", t->name}, {"shape", t->shape}});
    for (double v : t->values) export_detail::put_f32(bytes, v);
  }
  export_detail::write_bytes(blob, bytes);
  std::ofstream side(sidecar_path(blob), std::ios::trunc);
  if (!side) throw Error(ErrorKind::io_failure, "cannot write " + sidecar_path(blob).string());
  side << json{{"format", "float32-le"}, {"tensors", list}}.dump(2) << '\n';
}

/// Fills `tensors` from a blob whose sidecar must list the same names and
/// shapes in the same order.
inline void load_weights(const std::filesystem::path& blob, const std::vector<net::Tensor*>& tensors) {
  std::ifstream side(sidecar_path(blob));
  if (!side) throw Error(ErrorKind::unreadable_file, sidecar_path(blob).string());
  json doc;
  try {
    side >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::unsupported_encoding, "weight sidecar: " + std::string(e.what()));
  }
  const auto& list = doc.at("tensors");
  if (list.size() != tensors.size())
    throw_invalid("weight sidecar lists " + std::to_string(list.size()) + " tensors, model has " +
                  std::to_string(tensors.size()));
  const auto bytes = export_detail::read_bytes(blob);
  std::size_t off = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto* t = tensors[i];
    if (list[i].at("name").get<std::string>() != t->name ||
        list[i].at("shape").get<std::vector<std::size_t>>() != t->shape)
      throw_invalid("weight sidecar entry " + std::to_string(i) + " does not match tensor " + t->name);
    if (off + 4 * t->values.size() > bytes.size()) throw Error(ErrorKind::unsupported_encoding, "weight blob truncated");
    for (double& v : t->values) {
      v = std::bit_cast<float>(export_detail::get_u32(bytes, off));
      off += 4;
    }
  }
  if (off != bytes.size()) throw Error(ErrorKind::unsupported_encoding, "weight blob has trailing bytes");
}

}  // namespace bwe
