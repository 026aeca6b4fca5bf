// umt/audio.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/audio.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace umt {

int mu_law_encode(double x) {
  if (std::abs(x) > 1.0 + 1e-6) {
    throw std::domain_error("mu_law_encode: |x| = " + std::to_string(std::abs(x)) +
                            " exceeds 1 by more than 1e-6");
  }
  x = std::clamp(x, -1.0, 1.0);
  const double mu = kMuLawClasses - 1;
  double y = std::copysign(std::log1p(mu * std::abs(x)) / std::log(1.0 + mu), x);
  int idx = static_cast<int>(std::floor((y + 1.0) * 128.0));
  return std::clamp(idx, 0, 255);
}

double mu_law_decode(int i) {
  if (i < 0 || i > 255) {
    throw std::domain_error("mu_law_decode: index " + std::to_string(i) +
                            " outside [0,255]");
  }
  const double mu = kMuLawClasses - 1;
  double y = (i + 0.5) / 128.0 - 1.0;  // bin center on the companded axis
  return std::copysign((std::pow(1.0 + mu, std::abs(y)) - 1.0) / mu, y);
}

std::vector<int> mu_law_encode(const std::vector<float>& samples) {
  std::vector<int> out(samples.size());
  for (size_t i = 0; i < samples.size(); i++) out[i] = mu_law_encode(samples[i]);
  return out;
}

std::vector<float> mu_law_decode(const std::vector<int>& indices) {
  // All 256 values are reused constantly; table them.
  static const auto table = [] {
    std::vector<float> t(kMuLawClasses);
    for (int i = 0; i < kMuLawClasses; i++) t[i] = static_cast<float>(mu_law_decode(i));
    return t;
  }();
  std::vector<float> out(indices.size());
  for (size_t i = 0; i < indices.size(); i++) {
    int idx = indices[i];
    if (idx < 0 || idx > 255) throw std::domain_error("mu_law_decode: index out of range");
    out[i] = table[idx];
  }
  return out;
}

std::vector<float> mu_law_roundtrip(const std::vector<float>& samples) {
  return mu_law_decode(mu_law_encode(samples));
}

}  // namespace umt
