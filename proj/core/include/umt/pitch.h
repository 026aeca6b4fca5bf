// umt/pitch.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_PITCH_H_
#define UMT_PITCH_H_

#include <vector>

#include "umt/audio.h"

namespace umt {

struct PitchTrack {
  std::vector<double> f0;       // Hz, valid where voiced
  std::vector<bool> voiced;
  double frame_rate = 0;        // frames per second

  size_t frames() const { return f0.size(); }
};

struct PitchConfig {
  int frame = 2048;
  int hop = 512;
  double threshold = 0.1;  // cumulative-mean difference threshold
  double fmin = 50;
  double fmax = 2000;
};

/// Difference-function autocorrelation tracker (YIN style) with parabolic
/// lag refinement. Degenerate audio yields an all-unvoiced track.
PitchTrack track_pitch(const AudioSegment& s, const PitchConfig& cfg = {});

}  // namespace umt

#endif  // UMT_PITCH_H_
