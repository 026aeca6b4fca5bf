// umt/audio.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_AUDIO_H_
#define UMT_AUDIO_H_

#include <cstdint>
#include <vector>

namespace umt {

constexpr int kDefaultSampleRate = 16000;
constexpr int kMuLawClasses = 256;

/// Mono waveform. Samples are real-valued in [-1, 1]; the 8-bit mu-law
/// class-index view is derived on demand.
struct AudioSegment {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Companded 8-bit index for x in [-1, 1]. 256 equal bins on the companded
/// axis; x = 0 maps to bin 128. Values beyond the range by more than 1e-6
/// are rejected; smaller excursions are clamped.
int mu_law_encode(double x);

/// Inverse companding; returns the bin center, so encode(decode(i)) == i
/// for every index.
double mu_law_decode(int i);

std::vector<int> mu_law_encode(const std::vector<float>& samples);
std::vector<float> mu_law_decode(const std::vector<int>& indices);

/// Quantize-dequantize pass, the signal the encoder network consumes.
std::vector<float> mu_law_roundtrip(const std::vector<float>& samples);

}  // namespace umt

#endif  // UMT_AUDIO_H_
