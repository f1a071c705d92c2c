#pragma once

// Minimal RIFF/WAVE reader and writer for multichannel PCM.
// Read: 16/24/32-bit integer PCM and 32-bit IEEE float (plain or
// WAVE_FORMAT_EXTENSIBLE). Write: 16-bit PCM or 32-bit float.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/signal.hpp"

namespace gsg::wav {

enum class SampleFormat { pcm16, pcm24, pcm32, float32 };

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xff));
}
inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace detail

inline MultiChannel decode(const std::vector<unsigned char>& bytes) {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw FormatError("truncated fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw FormatError("truncated extensible fmt chunk");
        format = read_u16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) throw FormatError("missing or invalid fmt chunk");
  if (data == nullptr) throw FormatError("missing data chunk");

  std::size_t width = 0;
  if (format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) {
    width = bits / 8;
  } else if (format == kFormatFloat && bits == 32) {
    width = 4;
  } else {
    throw FormatError("unsupported sample format (tag " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)");
  }
  const std::size_t frames = data_size / (width * channels);
  MultiChannel out;
  out.fs = static_cast<double>(rate);
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t k = 0; k < frames; ++k) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const unsigned char* s = data + (k * channels + ch) * width;
      double v = 0.0;
      if (format == kFormatFloat) {
        float f;
        const std::uint32_t u = read_u32(s);
        std::memcpy(&f, &u, 4);
        v = f;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(s)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t i = static_cast<std::int32_t>(s[0] | (s[1] << 8) | (s[2] << 16));
        if (i & 0x800000) i -= 0x1000000;
        v = i / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(read_u32(s)) / 2147483648.0;
      }
      out.channels[ch][k] = v;
    }
  }
  return out;
}

inline std::vector<unsigned char> encode(const MultiChannel& signal, SampleFormat fmt = SampleFormat::float32) {
  using namespace detail;
  signal.validate();
  const auto channels = static_cast<std::uint16_t>(signal.channel_count());
  if (channels == 0) throw ConfigError("cannot encode a signal without channels");
  const std::uint16_t bits = fmt == SampleFormat::pcm16 ? 16 : fmt == SampleFormat::pcm24 ? 24 : 32;
  const std::uint16_t tag = fmt == SampleFormat::float32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t width = bits / 8u;
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.fs));
  const std::size_t frames = signal.length();
  const auto data_size = static_cast<std::uint32_t>(frames * channels * width);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * channels * width);
  put_u16(out, static_cast<std::uint16_t>(channels * width));
  put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  auto to_int = [](double v, double scale, double lo, double hi) {
    return static_cast<std::int64_t>(std::clamp(std::round(v * scale), lo, hi));
  };
  for (std::size_t k = 0; k < frames; ++k) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const double v = signal.channels[ch][k];
      switch (fmt) {
        case SampleFormat::float32: {
          const float f = static_cast<float>(v);
          std::uint32_t u;
          std::memcpy(&u, &f, 4);
          put_u32(out, u);
          break;
        }
        case SampleFormat::pcm16:
          put_u16(out, static_cast<std::uint16_t>(to_int(v, 32768.0, -32768.0, 32767.0)));
          break;
        case SampleFormat::pcm24: {
          const auto i = static_cast<std::uint32_t>(to_int(v, 8388608.0, -8388608.0, 8388607.0));
          for (int b = 0; b < 3; ++b) out.push_back(static_cast<unsigned char>((i >> (8 * b)) & 0xff));
          break;
        }
        case SampleFormat::pcm32:
          put_u32(out, static_cast<std::uint32_t>(to_int(v, 2147483648.0, -2147483648.0, 2147483647.0)));
          break;
      }
    }
  }
  return out;
}

inline MultiChannel read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

inline void write(const std::string& path, const MultiChannel& signal, SampleFormat fmt = SampleFormat::float32) {
  const auto bytes = encode(signal, fmt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace gsg::wav
