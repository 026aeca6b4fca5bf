// umt/augment.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/augment.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "umt/fft.h"
#include "umt/resample.h"

namespace umt {
namespace {

constexpr int kFrame = 1024;
constexpr int kHop = 256;  // synthesis hop
constexpr double kCrossfadeS = 0.010;

double wrap_phase(double p) {
  return p - 2.0 * M_PI * std::round(p / (2.0 * M_PI));
}

}  // namespace

AugmentSpec draw_augment_spec(double clip_len, Rng& rng) {
  if (clip_len < 0.5)
    throw std::invalid_argument("draw_augment_spec: clip shorter than 0.5 s");
  AugmentSpec spec;
  spec.seed = rng.next_u64();
  spec.seg_len = rng.uniform(0.25, 0.5);
  spec.shift = rng.uniform(-0.5, 0.5);
  spec.seg_start = rng.uniform(0.0, clip_len - spec.seg_len);
  return spec;
}

std::vector<float> vocoder_stretch(const std::vector<float>& x, size_t target_len) {
  const size_t src_len = x.size();
  if (src_len == 0 || target_len == 0) return std::vector<float>(target_len, 0.0f);
  if (src_len == target_len) return x;

  const int bins = kFrame / 2 + 1;
  Fft fft(kFrame);
  std::vector<float> win(kFrame);
  for (int i = 0; i < kFrame; i++)
    win[i] = static_cast<float>(0.5 - 0.5 * std::cos(2.0 * M_PI * i / kFrame));

  // Analysis hop so that synthesis frames at hop 256 span target_len.
  int n_frames = static_cast<int>((target_len + kHop - 1) / kHop) + 1;
  double hop_a = n_frames > 1
                     ? static_cast<double>(src_len > kFrame ? src_len - kFrame : 0) /
                           (n_frames - 1)
                     : 0.0;

  std::vector<float> out(target_len + kFrame, 0.0f);
  std::vector<float> norm(target_len + kFrame, 1e-9f);
  std::vector<float> frame(kFrame);
  std::vector<std::complex<float>> spec(bins), prev_spec(bins);
  std::vector<double> out_phase(bins, 0.0);
  int prev_pos = 0;

  for (int k = 0; k < n_frames; k++) {
    int pos = static_cast<int>(std::lround(k * hop_a));
    for (int i = 0; i < kFrame; i++) {
      size_t j = static_cast<size_t>(pos) + i;
      frame[i] = (j < src_len ? x[j] : 0.0f) * win[i];
    }
    fft.forward(frame.data(), spec.data());

    if (k == 0) {
      for (int b = 0; b < bins; b++) out_phase[b] = std::arg(spec[b]);
    } else {
      int da = std::max(1, pos - prev_pos);
      for (int b = 0; b < bins; b++) {
        double omega = 2.0 * M_PI * b / kFrame;
        double dphi = std::arg(spec[b]) - std::arg(prev_spec[b]) - omega * da;
        double freq = omega + wrap_phase(dphi) / da;
        out_phase[b] += freq * kHop;
      }
    }
    std::vector<std::complex<float>> synth(bins);
    for (int b = 0; b < bins; b++) {
      float mag = std::abs(spec[b]);
      synth[b] = std::polar(mag, static_cast<float>(out_phase[b]));
    }
    fft.inverse(synth.data(), frame.data());
    size_t base = static_cast<size_t>(k) * kHop;
    for (int i = 0; i < kFrame; i++) {
      if (base + i >= out.size()) break;
      out[base + i] += frame[i] * win[i];
      norm[base + i] += win[i] * win[i];
    }
    prev_spec = spec;
    prev_pos = pos;
  }

  std::vector<float> y(target_len);
  for (size_t i = 0; i < target_len; i++) y[i] = out[i] / norm[i];
  return y;
}

AudioSegment apply_pitch_distortion(const AudioSegment& s, const AugmentSpec& spec) {
  if (spec.seg_len < 0.25 - 1e-9 || spec.seg_len > 0.5 + 1e-9 ||
      std::abs(spec.shift) > 0.5 + 1e-9 || spec.seg_start < 0 ||
      spec.seg_start + spec.seg_len > s.duration_s() + 1e-9) {
    throw std::invalid_argument("apply_pitch_distortion: spec invalid for segment");
  }
  if (spec.shift == 0.0) return s;  // bit-exact identity path

  const int sr = s.sample_rate;
  const auto n = static_cast<ptrdiff_t>(s.size());
  auto a = static_cast<ptrdiff_t>(std::lround(spec.seg_start * sr));
  auto len = static_cast<ptrdiff_t>(std::lround(spec.seg_len * sr));
  len = std::min(len, n - a);

  std::vector<float> seg(s.samples.begin() + a, s.samples.begin() + a + len);
  double speed = std::pow(2.0, spec.shift / 12.0);
  std::vector<float> shifted = resample_speed(seg, speed);
  std::vector<float> stretched = vocoder_stretch(shifted, seg.size());

  AudioSegment out = s;
  auto fade = std::min<ptrdiff_t>(static_cast<ptrdiff_t>(kCrossfadeS * sr), len / 2);
  for (ptrdiff_t i = 0; i < len; i++) {
    double w = 1.0;
    if (i < fade) w = static_cast<double>(i + 1) / (fade + 1);
    if (len - 1 - i < fade) w = std::min(w, static_cast<double>(len - i) / (fade + 1));
    double v = (1.0 - w) * seg[i] + w * stretched[i];
    out.samples[a + i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

}  // namespace umt
