#pragma once

// Grid and stack serialisation.
//
//   grid dump:  u32 F, u32 T, then F*T float32 (row-major, row = bin)
//   stack dump: u32 C, u32 H, u32 W, then C*H*W float32
//
// All integers and floats are little-endian. CSV files hold one grid row per
// line.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/grid.hpp"

namespace bwe {

namespace export_detail {

inline void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::vector<unsigned char>& b, double v) { put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

inline std::uint32_t get_u32(const std::vector<unsigned char>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error(ErrorKind::io_failure, "short write to " + path.string());
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::unreadable_file, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace export_detail

inline std::vector<unsigned char> encode_grid_f32(const Grid<double>& g) {
  std::vector<unsigned char> b;
  b.reserve(8 + 4 * g.size());
  export_detail::put_u32(b, static_cast<std::uint32_t>(g.rows()));
  export_detail::put_u32(b, static_cast<std::uint32_t>(g.cols()));
  for (double v : g.flat()) export_detail::put_f32(b, v);
  return b;
}

inline Grid<double> decode_grid_f32(const std::vector<unsigned char>& b) {
  if (b.size() < 8) throw Error(ErrorKind::unsupported_encoding, "grid dump shorter than its header");
  const std::uint32_t rows = export_detail::get_u32(b, 0);
  const std::uint32_t cols = export_detail::get_u32(b, 4);
  if (b.size() != 8 + 4ull * rows * cols) throw Error(ErrorKind::unsupported_encoding, "grid dump size mismatch");
  Grid<double> g(rows, cols);
  auto f = g.flat();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::bit_cast<float>(export_detail::get_u32(b, 8 + 4 * i));
  return g;
}

inline void write_grid_f32(const std::filesystem::path& path, const Grid<double>& g) {
  export_detail::write_bytes(path, encode_grid_f32(g));
}

inline Grid<double> read_grid_f32(const std::filesystem::path& path) {
  return decode_grid_f32(export_detail::read_bytes(path));
}

/// C x H x W float32 dump; `data` is channel-major.
inline std::vector<unsigned char> encode_stack_f32(std::size_t channels, std::size_t height, std::size_t width,
                                                   std::span<const double> data) {
  require(data.size() == channels * height * width, "encode_stack_f32: data size does not match shape");
  std::vector<unsigned char> b;
  b.reserve(12 + 4 * data.size());
  export_detail::put_u32(b, static_cast<std::uint32_t>(channels));
  export_detail::put_u32(b, static_cast<std::uint32_t>(height));
  export_detail::put_u32(b, static_cast<std::uint32_t>(width));
  for (double v : data) export_detail::put_f32(b, v);
  return b;
}

inline void write_grid_csv(const std::filesystem::path& path, const Grid<double>& g) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  out << std::setprecision(9);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (c) out << ',';
      out << g(r, c);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io_failure, "short write to " + path.string());
}

}  // namespace bwe
