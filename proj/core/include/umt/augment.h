// umt/augment.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_AUGMENT_H_
#define UMT_AUGMENT_H_

#include <cstdint>

#include "umt/audio.h"
#include "umt/common.h"

namespace umt {

/// One random local pitch distortion: which part of the clip to detune and
/// by how much.
struct AugmentSpec {
  double seg_start = 0;  // seconds
  double seg_len = 0;    // seconds, in [0.25, 0.5]
  double shift = 0;      // half-steps, in [-0.5, 0.5]
  uint64_t seed = 0;
};

/// seg_len ~ U[0.25, 0.5], shift ~ U[-0.5, 0.5],
/// seg_start ~ U[0, clip_len - seg_len]. clip_len must be >= 0.5 s.
AugmentSpec draw_augment_spec(double clip_len, Rng& rng);

/// Length-preserving local pitch shift: the selected segment is resampled by
/// 2^(shift/12) and time-stretched back with a phase vocoder (frame 1024,
/// hop 256), then spliced in with a 10 ms crossfade. shift == 0 returns the
/// input unchanged.
AudioSegment apply_pitch_distortion(const AudioSegment& s, const AugmentSpec& spec);

/// Phase-vocoder time stretch to an exact output length, pitch preserved.
/// Exposed for tests.
std::vector<float> vocoder_stretch(const std::vector<float>& x, size_t target_len);

}  // namespace umt

#endif  // UMT_AUGMENT_H_
