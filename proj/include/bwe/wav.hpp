#pragma once

// RIFF/WAVE reader and writer. Only little-endian PCM16 and IEEE float32 are
// supported (WAVE_FORMAT_EXTENSIBLE is accepted when its sub-format is one of
// those two).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bwe/error.hpp"
#include "bwe/signal.hpp"

namespace bwe {

enum class WavEncoding { pcm16, float32 };

namespace wav_detail {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes a little-endian host");

inline std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_tag(std::vector<unsigned char>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

[[noreturn]] inline void unsupported(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::unsupported_encoding, path + ": " + why);
}

}  // namespace wav_detail

/// Decodes an in-memory WAV image. Channels are averaged to mono and samples
/// are scaled to [-1, 1] (PCM16 divides by 32768).
inline Waveform decode_wav(const std::vector<unsigned char>& bytes, const std::string& label = "<memory>") {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    unsupported(label, "missing RIFF/WAVE header");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) unsupported(label, "truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = get_u16(f);
      channels = get_u16(f + 2);
      rate = get_u32(f + 4);
      bits = get_u16(f + 14);
      if (format == 0xFFFE) {
        if (len < 40 || avail < 40) unsupported(label, "truncated extensible fmt chunk");
        format = get_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(len, avail);
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) unsupported(label, "no fmt chunk");
  if (data == nullptr) unsupported(label, "no data chunk");
  if (channels == 0 || rate == 0) unsupported(label, "zero channels or rate");

  std::size_t bytes_per_sample = 0;
  if (format == 1 && bits == 16)
    bytes_per_sample = 2;
  else if (format == 3 && bits == 32)
    bytes_per_sample = 4;
  else
    unsupported(label, "format tag " + std::to_string(format) + " with " + std::to_string(bits) + " bits");

  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_len / frame_bytes;
  Waveform wf;
  wf.rate = static_cast<int>(rate);
  wf.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (bytes_per_sample == 2) {
        acc += static_cast<std::int16_t>(get_u16(p)) / 32768.0;
      } else {
        acc += static_cast<double>(std::bit_cast<float>(get_u32(p)));
      }
    }
    wf.samples[i] = acc / channels;
  }
  return wf;
}

inline Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::unreadable_file, path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::unreadable_file, path.string());
  return decode_wav(bytes, path.string());
}

inline std::vector<unsigned char> encode_wav(const Waveform& wf, WavEncoding enc = WavEncoding::pcm16,
                                             int channels = 1) {
  using namespace wav_detail;
  require(wf.rate > 0, "encode_wav: rate must be positive");
  require(channels >= 1, "encode_wav: channels must be >= 1");
  const std::uint16_t bps = enc == WavEncoding::pcm16 ? 2 : 4;
  const auto block = static_cast<std::uint16_t>(bps * channels);
  const auto data_len = static_cast<std::uint32_t>(wf.samples.size() * block);

  std::vector<unsigned char> b;
  b.reserve(44 + data_len);
  put_tag(b, "RIFF");
  put_u32(b, 36 + data_len);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, enc == WavEncoding::pcm16 ? 1 : 3);
  put_u16(b, static_cast<std::uint16_t>(channels));
  put_u32(b, static_cast<std::uint32_t>(wf.rate));
  put_u32(b, static_cast<std::uint32_t>(wf.rate) * block);
  put_u16(b, block);
  put_u16(b, static_cast<std::uint16_t>(bps * 8));
  put_tag(b, "data");
  put_u32(b, data_len);
  for (double s : wf.samples) {
    for (int c = 0; c < channels; ++c) {
      if (enc == WavEncoding::pcm16) {
        const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
        put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
      }
    }
  }
  return b;
}

inline void save_wav(const std::filesystem::path& path, const Waveform& wf, WavEncoding enc = WavEncoding::pcm16) {
  const auto bytes = encode_wav(wf, enc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io_failure, "short write to " + path.string());
}

}  // namespace bwe
