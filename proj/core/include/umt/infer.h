// umt/infer.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_INFER_H_
#define UMT_INFER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "umt/audio.h"
#include "umt/checkpoint.h"
#include "umt/nets.h"

namespace umt {

/// Per-generation incremental decoder state: one ring buffer of layer-input
/// columns per layer, sized to that layer's dilation (kernel 2).
struct SamplerState {
  std::vector<Matf> ring;
  Matf skip_acc;  // scratch, skip x 1
  int t = 0;
  int frame = -1;
  std::vector<Matf> cond;  // per-layer conditioning column of the current frame
};

/// O(layers) work per emitted sample via ring-buffer reuse. Deterministic
/// given the RNG; temperature <= 0 selects argmax decoding.
std::vector<int> generate_fast(const Decoder<float>& dec, const Hyper& h,
                               const Matf& z, int n_samples, Rng& rng,
                               double temperature = 1.0);

/// Cache-free oracle: recomputes every activation from scratch for each
/// emitted sample, using the same per-column arithmetic. Emits identical
/// indices to generate_fast under the same RNG stream.
std::vector<int> generate_naive(const Decoder<float>& dec, const Hyper& h,
                                const Matf& z, int n_samples, Rng& rng,
                                double temperature = 1.0);

struct TranslationResult {
  AudioSegment output;
  Matf latent;
  int target_domain = 0;
  uint64_t seed = 0;
  double temperature = 1.0;
};

/// s^j = D^j(E(s)): encode without augmentation, then sample the domain
/// decoder autoregressively.
TranslationResult translate(const Model<float>& model, const AudioSegment& s,
                            int domain, uint64_t seed, double temperature = 1.0);

/// Encoder pass alone (quantize-dequantize input, no augmentation).
Matf encode_audio(const Model<float>& model, const AudioSegment& s);

/// Crossfade weight on e_j at fade frame f, evaluated at the frame center:
/// t / fade with t = (f + 0.5) / frame_rate.
inline double blend_weight(int f, int fade_frames) {
  return (f + 0.5) / static_cast<double>(fade_frames);
}

/// Crossfades two latents: `hold` seconds of e_i, then `fade` seconds
/// blending into e_j with weights 1 - t/fade and t/fade at frame centers.
Matf blend_latents(const Matf& e_i, const Matf& e_j, double hold = 3.5,
                   double fade = 1.5, int frames_per_second = 20);

}  // namespace umt

#endif  // UMT_INFER_H_
