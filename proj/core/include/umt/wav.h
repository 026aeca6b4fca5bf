// umt/wav.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_WAV_H_
#define UMT_WAV_H_

#include <string>

#include "umt/audio.h"

namespace umt {

/// Reads a PCM WAV (8/16/24-bit int or 32-bit float), averages channels to
/// mono, resamples to target_rate and normalizes to [-1, 1].
AudioSegment load_wav(const std::string& path, int target_rate = kDefaultSampleRate);

/// Writes 16-bit PCM mono at segment.sample_rate.
void save_wav(const AudioSegment& segment, const std::string& path);

/// Header-only probe: duration in seconds without decoding the data chunk.
double wav_duration_s(const std::string& path);

}  // namespace umt

#endif  // UMT_WAV_H_
