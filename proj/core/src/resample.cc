// umt/resample.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/resample.h"

#include <cmath>
#include <cstddef>

namespace umt {
namespace {

constexpr int kHalfTaps = 32;  // 64 taps at unit scale

double sinc(double t) {
  if (std::abs(t) < 1e-12) return 1.0;
  double pt = M_PI * t;
  return std::sin(pt) / pt;
}

std::vector<float> resample_impl(const std::vector<float>& x, double speed,
                                 size_t out_len) {
  // scale < 1 when reading faster than real time (anti-alias lowpass).
  double scale = speed > 1.0 ? 1.0 / speed : 1.0;
  double hw = kHalfTaps / scale;  // half-width in input samples
  std::vector<float> y(out_len, 0.0f);
  const ptrdiff_t n = static_cast<ptrdiff_t>(x.size());
  for (size_t i = 0; i < out_len; i++) {
    double center = i * speed;
    auto j0 = static_cast<ptrdiff_t>(std::ceil(center - hw));
    auto j1 = static_cast<ptrdiff_t>(std::floor(center + hw));
    double acc = 0, wsum = 0;
    for (ptrdiff_t j = j0; j <= j1; j++) {
      double t = j - center;
      double w = scale * sinc(scale * t) *
                 (0.5 + 0.5 * std::cos(M_PI * t / hw));  // Hann
      wsum += w;
      if (j >= 0 && j < n) acc += w * x[j];
    }
    // Normalizing by the full (unclipped) weight sum keeps DC flat.
    y[i] = wsum > 1e-9 ? static_cast<float>(acc / wsum) : 0.0f;
  }
  return y;
}

}  // namespace

std::vector<float> resample(const std::vector<float>& x, double in_rate,
                            double out_rate) {
  auto out_len = static_cast<size_t>(std::floor(x.size() * out_rate / in_rate));
  return resample_impl(x, in_rate / out_rate, out_len);
}

std::vector<float> resample_speed(const std::vector<float>& x, double speed) {
  auto out_len = static_cast<size_t>(std::floor(x.size() / speed));
  return resample_impl(x, speed, out_len);
}

}  // namespace umt
