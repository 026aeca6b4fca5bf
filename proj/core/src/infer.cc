// umt/infer.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/infer.h"

#include <cmath>
#include <stdexcept>

namespace umt {
namespace {

using Vecf = Eigen::VectorXf;

// Shared per-column arithmetic. The cached and cache-free samplers both go
// through these, so their emitted indices agree bit for bit.

void layer_col(const DecLayer<float>& lay, int r, const Vecf& x_old,
               const Vecf& x_cur, const Vecf& cond_col, Vecf* x_next, Vecf* gated) {
  Vecf u = lay.dilated.taps[0] * x_old + lay.dilated.taps[1] * x_cur +
           lay.dilated.bias.col(0) + cond_col;
  Vecf tf = u.head(r).array().tanh();
  Vecf sg = (1.0f / (1.0f + (-u.tail(r)).array().exp())).matrix();
  *gated = tf.cwiseProduct(sg);
  *x_next = x_cur + lay.res.taps[0] * *gated + lay.res.bias.col(0);
}

Vecf head_col(const Decoder<float>& dec, const Vecf& skip_sum) {
  Vecf h0 = skip_sum.cwiseMax(0.0f);
  Vecf h1 = (dec.head1.taps[0] * h0 + dec.head1.bias.col(0)).cwiseMax(0.0f);
  return dec.head2.taps[0] * h1 + dec.head2.bias.col(0);
}

int sample_index(const Vecf& logits, Rng& rng, double temperature) {
  if (temperature <= 0) {
    int best = 0;
    logits.maxCoeff(&best);
    return best;
  }
  float mx = logits.maxCoeff();
  Eigen::VectorXd p =
      ((logits.array() - mx).cast<double>() / temperature).exp().matrix();
  double u = rng.uniform() * p.sum();
  double acc = 0;
  for (int i = 0; i < p.size(); i++) {
    acc += p[i];
    if (u < acc) return i;
  }
  return static_cast<int>(p.size()) - 1;
}

void check_gen_args(const Hyper& h, const Matf& z, int n_samples) {
  if (n_samples > z.cols() * h.pool_kernel)
    throw std::invalid_argument("generate: n_samples exceeds conditioning span");
}

}  // namespace

std::vector<int> generate_fast(const Decoder<float>& dec, const Hyper& h,
                               const Matf& z, int n_samples, Rng& rng,
                               double temperature) {
  check_gen_args(h, z, n_samples);
  const int r = h.dec_residual;
  const int layers = static_cast<int>(dec.layers.size());

  SamplerState st;
  st.ring.reserve(layers);
  for (int l = 0; l < layers; l++)
    st.ring.push_back(Matf::Zero(r, dec.layers[l].dilated.dilation));
  st.cond.assign(layers, Matf());

  std::vector<int> out;
  out.reserve(n_samples);
  Vecf zero_col = Vecf::Zero(r);
  Vecf x_cur(r), x_next(r), gated(r);

  for (int t = 0; t < n_samples; t++) {
    int frame = t / h.pool_kernel;
    if (frame != st.frame) {
      for (int l = 0; l < layers; l++)
        st.cond[l] = dec.layers[l].cond * z.col(frame);
      st.frame = frame;
    }
    x_cur = t == 0 ? zero_col : Vecf(dec.embed.col(out[t - 1]));
    Vecf skip_sum = Vecf::Zero(h.dec_skip);
    for (int l = 0; l < layers; l++) {
      const auto& lay = dec.layers[l];
      const int d = lay.dilated.dilation;
      if (static_cast<Eigen::Index>(st.ring[l].rows()) != r)
        throw std::logic_error("sampler ring buffer corrupted");
      Vecf x_old = t >= d ? Vecf(st.ring[l].col((t - d) % d)) : zero_col;
      st.ring[l].col(t % d) = x_cur;
      layer_col(lay, r, x_old, x_cur, st.cond[l].col(0), &x_next, &gated);
      skip_sum += lay.skip.taps[0] * gated + lay.skip.bias.col(0);
      x_cur = x_next;
    }
    out.push_back(sample_index(head_col(dec, skip_sum), rng, temperature));
  }
  return out;
}

std::vector<int> generate_naive(const Decoder<float>& dec, const Hyper& h,
                                const Matf& z, int n_samples, Rng& rng,
                                double temperature) {
  check_gen_args(h, z, n_samples);
  const int r = h.dec_residual;
  const int layers = static_cast<int>(dec.layers.size());
  const int rf = h.receptive_field();
  Vecf zero_col = Vecf::Zero(r);

  std::vector<int> out;
  out.reserve(n_samples);
  for (int t = 0; t < n_samples; t++) {
    int start0 = std::max(0, t - (rf - 1));
    // Rebuild every activation in the dependency cone of column t.
    std::vector<Vecf> cols;
    for (int s = start0; s <= t; s++)
      cols.push_back(s == 0 ? zero_col : Vecf(dec.embed.col(out[s - 1])));
    int start = start0;
    Vecf skip_sum = Vecf::Zero(h.dec_skip);
    Vecf x_next(r), gated(r);
    for (int l = 0; l < layers; l++) {
      const auto& lay = dec.layers[l];
      const int d = lay.dilated.dilation;
      int next_start = start == 0 ? 0 : start + d;
      std::vector<Vecf> next_cols;
      for (int s = next_start; s <= t; s++) {
        const Vecf& x_cur = cols[s - start];
        const Vecf& x_old = s - d >= start ? cols[s - d - start] : zero_col;
        Vecf cond_col = lay.cond * z.col(s / h.pool_kernel);
        layer_col(lay, r, x_old, x_cur, cond_col, &x_next, &gated);
        if (s == t) skip_sum += lay.skip.taps[0] * gated + lay.skip.bias.col(0);
        next_cols.push_back(x_next);
      }
      cols = std::move(next_cols);
      start = next_start;
    }
    out.push_back(sample_index(head_col(dec, skip_sum), rng, temperature));
  }
  return out;
}

Matf encode_audio(const Model<float>& model, const AudioSegment& s) {
  std::vector<float> q = mu_law_roundtrip(s.samples);
  Matf input = Eigen::Map<const Matf>(q.data(), 1, q.size());
  return encode_forward(model.enc, model.h, input, (EncCache<float>*)nullptr);
}

TranslationResult translate(const Model<float>& model, const AudioSegment& s,
                            int domain, uint64_t seed, double temperature) {
  if (domain < 0 || domain >= static_cast<int>(model.dec.size()))
    throw std::invalid_argument("translate: unknown domain id " +
                                std::to_string(domain));
  TranslationResult res;
  res.latent = encode_audio(model, s);
  res.target_domain = domain;
  res.seed = seed;
  res.temperature = temperature;
  const auto n = static_cast<int>(res.latent.cols()) * model.h.pool_kernel;
  Rng rng(seed);
  std::vector<int> indices =
      generate_fast(model.dec[domain], model.h, res.latent, n, rng, temperature);
  res.output.sample_rate = model.h.sample_rate;
  res.output.samples = mu_law_decode(indices);
  return res;
}

Matf blend_latents(const Matf& e_i, const Matf& e_j, double hold, double fade,
                   int frames_per_second) {
  const auto hold_f = static_cast<Eigen::Index>(std::lround(hold * frames_per_second));
  const auto fade_f = static_cast<Eigen::Index>(std::lround(fade * frames_per_second));
  if (e_i.cols() < hold_f + fade_f || e_j.cols() < hold_f + fade_f)
    throw std::invalid_argument("blend_latents: latents shorter than hold+fade");
  Matf out(e_i.rows(), hold_f + fade_f);
  out.leftCols(hold_f) = e_i.leftCols(hold_f);
  for (Eigen::Index f = 0; f < fade_f; f++) {
    // Both latents share the output timeline. Weight t/fade on e_j at the
    // frame center, written as a delta from e_i so equal inputs reproduce
    // e_i exactly.
    auto tau = static_cast<float>(blend_weight(static_cast<int>(f),
                                               static_cast<int>(fade_f)));
    out.col(hold_f + f) =
        e_i.col(hold_f + f) + tau * (e_j.col(hold_f + f) - e_i.col(hold_f + f));
  }
  return out;
}

}  // namespace umt
