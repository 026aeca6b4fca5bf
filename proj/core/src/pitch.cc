// umt/pitch.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/pitch.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace umt {

PitchTrack track_pitch(const AudioSegment& s, const PitchConfig& cfg) {
  PitchTrack track;
  track.frame_rate = static_cast<double>(s.sample_rate) / cfg.hop;
  const auto n = static_cast<ptrdiff_t>(s.size());
  if (n < cfg.frame) return track;

  const int window = cfg.frame / 2;
  const int tau_min = std::max(2, static_cast<int>(s.sample_rate / cfg.fmax));
  const int tau_max =
      std::min(cfg.frame - window - 1, static_cast<int>(s.sample_rate / cfg.fmin));

  std::vector<double> diff(tau_max + 1), cmndf(tau_max + 1);
  for (ptrdiff_t pos = 0; pos + cfg.frame <= n; pos += cfg.hop) {
    const float* x = s.samples.data() + pos;

    double rms = 0;
    for (int i = 0; i < window; i++) rms += double(x[i]) * x[i];
    rms = std::sqrt(rms / window);
    if (rms < 1e-4) {
      track.f0.push_back(0);
      track.voiced.push_back(false);
      continue;
    }

    for (int tau = 1; tau <= tau_max; tau++) {
      double d = 0;
      for (int i = 0; i < window; i++) {
        double delta = double(x[i]) - x[i + tau];
        d += delta * delta;
      }
      diff[tau] = d;
    }
    double cum = 0;
    cmndf[0] = 1;
    for (int tau = 1; tau <= tau_max; tau++) {
      cum += diff[tau];
      cmndf[tau] = cum > 0 ? diff[tau] * tau / cum : 1.0;
    }

    int tau = -1;
    for (int c = tau_min; c <= tau_max; c++) {
      if (cmndf[c] < cfg.threshold) {
        // descend to the local minimum of the dip
        tau = c;
        while (tau + 1 <= tau_max && cmndf[tau + 1] < cmndf[tau]) tau++;
        break;
      }
    }
    if (tau < 0) {
      track.f0.push_back(0);
      track.voiced.push_back(false);
      continue;
    }
    double refined = tau;
    if (tau > 1 && tau < tau_max) {
      double a = cmndf[tau - 1], b = cmndf[tau], c = cmndf[tau + 1];
      double denom = a - 2 * b + c;
      if (std::abs(denom) > 1e-15) refined += 0.5 * (a - c) / denom;
    }
    double f0 = s.sample_rate / refined;
    if (f0 < cfg.fmin || f0 > cfg.fmax) {
      track.f0.push_back(0);
      track.voiced.push_back(false);
    } else {
      track.f0.push_back(f0);
      track.voiced.push_back(true);
    }
  }
  return track;
}

}  // namespace umt
