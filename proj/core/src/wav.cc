// umt/wav.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "umt/resample.h"

namespace umt {
namespace {

struct FmtChunk {
  uint16_t format = 0;  // 1 = PCM, 3 = IEEE float
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

uint32_t read_u32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
}
uint16_t read_u16(std::istream& in) {
  uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return uint16_t(b[0] | (b[1] << 8));
}

/// Walks the RIFF chunks; returns fmt and the raw data bytes (data skipped
/// if want_data is false, but its size is still reported).
void parse_wav(const std::string& path, FmtChunk* fmt, std::vector<uint8_t>* data,
               bool want_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("not a RIFF file: " + path);
  read_u32(in);
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("not a WAVE file: " + path);

  bool have_fmt = false, have_data = false;
  while (in.read(tag, 4)) {
    uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      fmt->format = read_u16(in);
      fmt->channels = read_u16(in);
      fmt->sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      fmt->bits = read_u16(in);
      if (fmt->format == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE: subformat GUID
        read_u16(in);               // cbSize
        read_u32(in);               // valid bits / channel mask (partial)
        read_u32(in);
        fmt->format = read_u16(in);
        in.seekg(size - 26 + (size & 1), std::ios::cur);
      } else {
        in.seekg(size - 16 + (size & 1), std::ios::cur);
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data->resize(size);
      if (want_data) {
        in.read(reinterpret_cast<char*>(data->data()), size);
        if (!in) throw std::runtime_error("truncated WAV data chunk: " + path);
      } else {
        in.seekg(size + (size & 1), std::ios::cur);
      }
      have_data = true;
      if (have_fmt) break;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  if (!have_fmt || !have_data)
    throw std::runtime_error("missing fmt/data chunk in WAV: " + path);
  if (fmt->format != 1 && fmt->format != 3)
    throw std::runtime_error("unsupported (compressed?) WAV format tag " +
                             std::to_string(fmt->format) + ": " + path);
  if (fmt->channels == 0) throw std::runtime_error("zero channels in WAV: " + path);
}

size_t frame_count(const FmtChunk& fmt, size_t data_bytes) {
  size_t bytes_per_frame = size_t(fmt.channels) * (fmt.bits / 8);
  if (bytes_per_frame == 0) throw std::runtime_error("bad WAV bit depth");
  return data_bytes / bytes_per_frame;
}

}  // namespace

AudioSegment load_wav(const std::string& path, int target_rate) {
  FmtChunk fmt;
  std::vector<uint8_t> data;
  parse_wav(path, &fmt, &data, /*want_data=*/true);

  size_t frames = frame_count(fmt, data.size());
  int ch = fmt.channels;
  std::vector<float> mono(frames, 0.0f);
  const uint8_t* p = data.data();
  for (size_t i = 0; i < frames; i++) {
    double acc = 0;
    for (int c = 0; c < ch; c++) {
      double v = 0;
      switch (fmt.bits) {
        case 8:  // unsigned
          v = (int(*p) - 128) / 128.0;
          p += 1;
          break;
        case 16: {
          int16_t s;
          std::memcpy(&s, p, 2);
          v = s / 32768.0;
          p += 2;
          break;
        }
        case 24: {
          int32_t s = (p[0] << 8) | (p[1] << 16) | (int32_t(p[2]) << 24);
          v = (s >> 8) / 8388608.0;
          p += 3;
          break;
        }
        case 32: {
          if (fmt.format == 3) {
            float f;
            std::memcpy(&f, p, 4);
            v = f;
          } else {
            int32_t s;
            std::memcpy(&s, p, 4);
            v = s / 2147483648.0;
          }
          p += 4;
          break;
        }
        default:
          throw std::runtime_error("unsupported WAV bit depth " + std::to_string(fmt.bits));
      }
      acc += v;
    }
    mono[i] = static_cast<float>(acc / ch);
  }

  AudioSegment seg;
  seg.sample_rate = target_rate;
  if (int(fmt.sample_rate) == target_rate) {
    seg.samples = std::move(mono);
  } else {
    seg.samples = resample(mono, fmt.sample_rate, target_rate);
  }
  for (auto& s : seg.samples) s = std::clamp(s, -1.0f, 1.0f);
  return seg;
}

void save_wav(const AudioSegment& segment, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write WAV file: " + path);
  uint32_t n = static_cast<uint32_t>(segment.samples.size());
  uint32_t data_bytes = n * 2;
  auto w16 = [&](uint16_t v) { out.put(char(v & 0xff)).put(char(v >> 8)); };
  auto w32 = [&](uint32_t v) {
    out.put(char(v & 0xff)).put(char((v >> 8) & 0xff));
    out.put(char((v >> 16) & 0xff)).put(char(v >> 24));
  };
  out.write("RIFF", 4);
  w32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  w32(16);
  w16(1);  // PCM
  w16(1);  // mono
  w32(segment.sample_rate);
  w32(segment.sample_rate * 2);
  w16(2);
  w16(16);
  out.write("data", 4);
  w32(data_bytes);
  for (float s : segment.samples) {
    double v = std::clamp(double(s), -1.0, 1.0);
    auto q = static_cast<int>(std::lrint(v * 32768.0));
    w16(uint16_t(int16_t(std::clamp(q, -32768, 32767))));
  }
  if (!out) throw std::runtime_error("short write to WAV file: " + path);
}

double wav_duration_s(const std::string& path) {
  FmtChunk fmt;
  std::vector<uint8_t> data;
  parse_wav(path, &fmt, &data, /*want_data=*/false);
  return static_cast<double>(frame_count(fmt, data.size())) / fmt.sample_rate;
}

}  // namespace umt
