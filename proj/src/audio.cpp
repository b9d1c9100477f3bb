// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace kamir {

namespace {

// RIFF/WAVE chunk plumbing. Only the canonical little-endian layout is
// supported; files are assumed to fit in memory.

void write_u32(std::ostream &os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 4);
}

void write_u16(std::ostream &os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

}  // namespace

AudioSignal read_wav(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open WAV file: " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path);

  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char *data = nullptr;
  std::uint32_t data_size = 0;

  // Walk chunks; ignore everything except fmt and data.
  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const unsigned char *hdr = raw.data() + pos;
    std::uint32_t size = read_u32(hdr + 4);
    const unsigned char *body = hdr + 8;
    if (pos + 8 + size > raw.size())
      throw std::runtime_error("truncated WAV chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("malformed fmt chunk: " + path);
      audio_format = read_u16(body);
      channels = read_u16(body + 2);
      sample_rate = read_u32(body + 4);
      bits = read_u16(body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1);  // chunks are word-aligned
  }
  if (!data || sample_rate == 0)
    throw std::runtime_error("missing fmt/data chunk: " + path);
  if (channels != 1)
    throw std::runtime_error("only mono WAV is supported: " + path);

  AudioSignal out;
  out.sample_rate = static_cast<int>(sample_rate);
  if (audio_format == 1 && bits == 16) {
    std::int64_t n = data_size / 2;
    out.samples.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      std::int16_t s = static_cast<std::int16_t>(read_u16(data + 2 * i));
      out.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (audio_format == 3 && bits == 32) {
    std::int64_t n = data_size / 4;
    out.samples.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      std::uint32_t u = read_u32(data + 4 * i);
      float v;
      std::memcpy(&v, &u, 4);
      out.samples[i] = static_cast<double>(v);
    }
  } else {
    throw std::runtime_error("unsupported WAV encoding (want PCM16 or float32): " +
                             path);
  }
  return out;
}

void write_wav(const std::string &path, const AudioSignal &signal,
               WavFormat format) {
  if (signal.sample_rate <= 0)
    throw std::invalid_argument("write_wav: sample_rate must be positive");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create WAV file: " + path);

  const std::int64_t n = signal.samples.size();
  const std::uint16_t channels = 1;
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block = channels * bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(n * block);

  f.write("RIFF", 4);
  write_u32(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_u32(f, 16);
  write_u16(f, format == WavFormat::kPcm16 ? 1 : 3);
  write_u16(f, channels);
  write_u32(f, static_cast<std::uint32_t>(signal.sample_rate));
  write_u32(f, static_cast<std::uint32_t>(signal.sample_rate) * block);
  write_u16(f, block);
  write_u16(f, bits);
  f.write("data", 4);
  write_u32(f, data_size);

  if (format == WavFormat::kPcm16) {
    for (std::int64_t i = 0; i < n; ++i) {
      double v = std::clamp(signal.samples[i], -1.0, 1.0);
      long s = std::lround(v * 32767.0);
      write_u16(f, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      float v = static_cast<float>(signal.samples[i]);
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      write_u32(f, u);
    }
  }
  if (!f) throw std::runtime_error("failed writing WAV file: " + path);
}

}  // namespace kamir
