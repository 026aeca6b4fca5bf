// umt/nets.h
//
// Forward and reverse-mode computations for the shared encoder, the
// per-domain WaveNet decoders and the domain classifier. Everything is
// templated on the scalar type: float for training/inference, double for
// the finite-difference gradient checks.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_NETS_H_
#define UMT_NETS_H_

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "umt/audio.h"
#include "umt/common.h"

namespace umt {

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

struct Hyper {
  int sample_rate = 16000;
  int latent_channels = 64;
  int pool_kernel = 800;  // 50 ms at 16 kHz; stride equals kernel

  int enc_blocks = 3;
  int enc_layers_per_block = 10;
  int enc_width = 128;
  int enc_kernel = 3;

  int dec_blocks = 4;
  int dec_layers_per_block = 10;
  int dec_residual = 128;
  int dec_skip = 256;

  int cls_width = 128;
  int cls_kernel = 3;

  int n_domains = 2;

  int enc_layers() const { return enc_blocks * enc_layers_per_block; }
  int dec_layers() const { return dec_blocks * dec_layers_per_block; }
  int dec_dilation(int layer) const { return 1 << (layer % dec_layers_per_block); }
  int enc_dilation(int layer) const { return 1 << (layer % enc_layers_per_block); }
  // Kernel-2 causal stack: blocks * (2^layers - 1) + 1.
  int receptive_field() const {
    return dec_blocks * ((1 << dec_layers_per_block) - 1) + 1;
  }
  int frames_per_second() const { return sample_rate / pool_kernel; }

  static Hyper full() { return Hyper{}; }
  static Hyper toy() {
    Hyper h;
    h.enc_blocks = 1;
    h.enc_layers_per_block = 6;
    h.enc_width = 32;
    h.dec_blocks = 2;
    h.dec_layers_per_block = 8;
    h.dec_residual = 32;
    h.dec_skip = 64;
    return h;
  }
  // Small enough for exhaustive numeric tests.
  static Hyper tiny() {
    Hyper h;
    h.enc_blocks = 1;
    h.enc_layers_per_block = 2;
    h.enc_width = 4;
    h.latent_channels = 4;
    h.pool_kernel = 8;
    h.dec_blocks = 1;
    h.dec_layers_per_block = 2;
    h.dec_residual = 4;
    h.dec_skip = 6;
    h.cls_width = 4;
    return h;
  }
};

// ---------------------------------------------------------------------------
// Dilated 1D convolution primitive
// ---------------------------------------------------------------------------

enum class Pad { kCausal, kSame };

template <typename T>
struct Conv1d {
  std::vector<Mat<T>> taps;  // one (out x in) matrix per kernel position
  Mat<T> bias;               // out x 1
  int dilation = 1;
  Pad pad = Pad::kSame;

  int out_channels() const { return static_cast<int>(taps[0].rows()); }
  int in_channels() const { return static_cast<int>(taps[0].cols()); }
  int kernel() const { return static_cast<int>(taps.size()); }

  // Column offset read by tap k: causal taps end at the current sample,
  // same-padding taps are centered.
  int offset(int k) const {
    return pad == Pad::kCausal ? -(kernel() - 1 - k) * dilation
                               : (k - (kernel() - 1) / 2) * dilation;
  }
};

template <typename T>
Conv1d<T> make_conv(int in_ch, int out_ch, int kernel, int dilation, Pad pad) {
  Conv1d<T> c;
  c.dilation = dilation;
  c.pad = pad;
  c.taps.assign(kernel, Mat<T>::Zero(out_ch, in_ch));
  c.bias = Mat<T>::Zero(out_ch, 1);
  return c;
}

template <typename T>
Mat<T> conv_forward(const Conv1d<T>& c, const Mat<T>& x) {
  const auto n = x.cols();
  // Both padding modes have a tap at offset 0 (causal: the last tap; same,
  // odd kernel: the center tap). Writing that tap's product straight into the
  // output avoids materializing a bias-filled matrix first, which dominates
  // the cost for wide outputs.
  int k0 = -1;
  for (int k = 0; k < c.kernel(); k++)
    if (c.offset(k) == 0) k0 = k;
  Mat<T> y;
  if (k0 >= 0) {
    y.noalias() = c.taps[k0] * x;
  } else {
    y = Mat<T>::Zero(c.out_channels(), n);
  }
  for (int k = 0; k < c.kernel(); k++) {
    if (k == k0) continue;
    const auto off = static_cast<Eigen::Index>(c.offset(k));
    Eigen::Index t0 = std::max<Eigen::Index>(0, -off);
    Eigen::Index t1 = std::min<Eigen::Index>(n, n - off);
    if (t1 <= t0) continue;
    y.middleCols(t0, t1 - t0).noalias() += c.taps[k] * x.middleCols(t0 + off, t1 - t0);
  }
  y.colwise() += Eigen::Matrix<T, Eigen::Dynamic, 1>(c.bias.col(0));
  return y;
}

/// Accumulates dL/dx into dx (if non-null) and parameter gradients into g.
template <typename T>
void conv_backward(const Conv1d<T>& c, const Mat<T>& x, const Mat<T>& dy,
                   Mat<T>* dx, Conv1d<T>* g) {
  const auto n = x.cols();
  if (g) g->bias.noalias() += dy.rowwise().sum();
  for (int k = 0; k < c.kernel(); k++) {
    const auto off = static_cast<Eigen::Index>(c.offset(k));
    Eigen::Index t0 = std::max<Eigen::Index>(0, -off);
    Eigen::Index t1 = std::min<Eigen::Index>(n, n - off);
    if (t1 <= t0) continue;
    auto dy_blk = dy.middleCols(t0, t1 - t0);
    if (g) g->taps[k].noalias() += dy_blk * x.middleCols(t0 + off, t1 - t0).transpose();
    if (dx)
      dx->middleCols(t0 + off, t1 - t0).noalias() += c.taps[k].transpose() * dy_blk;
  }
}

// ---------------------------------------------------------------------------
// Shared encoder
// ---------------------------------------------------------------------------

template <typename T>
struct EncLayer {
  Conv1d<T> dilated;  // kernel 3, same padding
  Conv1d<T> mix;      // 1x1
};

template <typename T>
struct Encoder {
  Conv1d<T> input;  // 1 -> width
  std::vector<EncLayer<T>> layers;
  Conv1d<T> proj;  // 1x1 width -> latent
};

template <typename T>
Encoder<T> make_encoder(const Hyper& h) {
  Encoder<T> e;
  e.input = make_conv<T>(1, h.enc_width, h.enc_kernel, 1, Pad::kSame);
  for (int l = 0; l < h.enc_layers(); l++) {
    EncLayer<T> lay;
    lay.dilated =
        make_conv<T>(h.enc_width, h.enc_width, h.enc_kernel, h.enc_dilation(l), Pad::kSame);
    lay.mix = make_conv<T>(h.enc_width, h.enc_width, 1, 1, Pad::kSame);
    e.layers.push_back(std::move(lay));
  }
  e.proj = make_conv<T>(h.enc_width, h.latent_channels, 1, 1, Pad::kSame);
  return e;
}

template <typename T>
struct EncCache {
  Mat<T> input;                    // 1 x n
  std::vector<Mat<T>> layer_in;    // x entering each residual layer
  std::vector<Mat<T>> layer_conv;  // dilated-conv output, pre second ReLU
  Mat<T> top;                      // activations entering the projection
  Mat<T> zfull;                    // latent x n, pre pooling
};

template <typename T>
Mat<T> relu(const Mat<T>& x) {
  return x.cwiseMax(T(0));
}

/// Fully convolutional; returns latent_channels x floor(n / pool) frames.
template <typename T>
Mat<T> encode_forward(const Encoder<T>& e, const Hyper& h, const Mat<T>& input,
                      EncCache<T>* cache) {
  const auto n = input.cols();
  if (n < h.pool_kernel)
    throw std::invalid_argument("encode: input shorter than one pooling window (" +
                                std::to_string(n) + " < " +
                                std::to_string(h.pool_kernel) + " samples)");
  if (cache) {
    cache->input = input;
    cache->layer_in.clear();
    cache->layer_conv.clear();
  }
  Mat<T> x = conv_forward(e.input, input);
  for (const auto& lay : e.layers) {
    if (cache) cache->layer_in.push_back(x);
    Mat<T> c = conv_forward(lay.dilated, relu(x));
    if (cache) cache->layer_conv.push_back(c);
    x += conv_forward(lay.mix, relu(c));
  }
  if (cache) cache->top = x;
  Mat<T> zfull = conv_forward(e.proj, x);
  if (cache) cache->zfull = zfull;
  const auto frames = n / h.pool_kernel;
  Mat<T> z(h.latent_channels, frames);
  for (Eigen::Index f = 0; f < frames; f++)
    z.col(f) = zfull.middleCols(f * h.pool_kernel, h.pool_kernel).rowwise().mean();
  return z;
}

template <typename T>
void encode_backward(const Encoder<T>& e, const Hyper& h, const EncCache<T>& cache,
                     const Mat<T>& dz, Encoder<T>* g, Mat<T>* dinput) {
  const auto n = cache.input.cols();
  Mat<T> dzfull = Mat<T>::Zero(h.latent_channels, n);
  for (Eigen::Index f = 0; f < dz.cols(); f++)
    dzfull.middleCols(f * h.pool_kernel, h.pool_kernel).colwise() +=
        Eigen::Matrix<T, Eigen::Dynamic, 1>(dz.col(f) / T(h.pool_kernel));

  Mat<T> dx = Mat<T>::Zero(e.proj.in_channels(), n);
  conv_backward(e.proj, cache.top, dzfull, &dx, g ? &g->proj : nullptr);

  for (int l = static_cast<int>(e.layers.size()) - 1; l >= 0; l--) {
    const auto& lay = e.layers[l];
    const Mat<T>& x = cache.layer_in[l];
    const Mat<T>& c = cache.layer_conv[l];
    Mat<T> da2 = Mat<T>::Zero(c.rows(), n);
    conv_backward(lay.mix, relu(c), dx, &da2, g ? &g->layers[l].mix : nullptr);
    Mat<T> dc = (c.array() > T(0)).select(da2, Mat<T>::Zero(c.rows(), n));
    Mat<T> da = Mat<T>::Zero(x.rows(), n);
    conv_backward(lay.dilated, relu(x), dc, &da, g ? &g->layers[l].dilated : nullptr);
    // dx carries the residual path; add the conv path through the first ReLU.
    dx += (x.array() > T(0)).select(da, Mat<T>::Zero(x.rows(), n));
  }
  Mat<T> din = Mat<T>::Zero(1, n);
  conv_backward(e.input, cache.input, dx, dinput ? dinput : &din,
                g ? &g->input : nullptr);
}

// ---------------------------------------------------------------------------
// WaveNet decoder (one per domain)
// ---------------------------------------------------------------------------

template <typename T>
struct DecLayer {
  Conv1d<T> dilated;  // causal kernel 2, residual -> 2*residual (filter; gate)
  Mat<T> cond;        // 2*residual x latent, applied per frame
  Conv1d<T> res;      // 1x1 residual -> residual
  Conv1d<T> skip;     // 1x1 residual -> skip
};

template <typename T>
struct Decoder {
  Mat<T> embed;  // residual x 256, previous-sample embedding
  std::vector<DecLayer<T>> layers;
  Conv1d<T> head1;  // 1x1 skip -> skip
  Conv1d<T> head2;  // 1x1 skip -> 256 logits
};

template <typename T>
Decoder<T> make_decoder(const Hyper& h) {
  Decoder<T> d;
  const int r = h.dec_residual;
  d.embed = Mat<T>::Zero(r, kMuLawClasses);
  for (int l = 0; l < h.dec_layers(); l++) {
    DecLayer<T> lay;
    lay.dilated = make_conv<T>(r, 2 * r, 2, h.dec_dilation(l), Pad::kCausal);
    lay.cond = Mat<T>::Zero(2 * r, h.latent_channels);
    lay.res = make_conv<T>(r, r, 1, 1, Pad::kSame);
    lay.skip = make_conv<T>(r, h.dec_skip, 1, 1, Pad::kSame);
    d.layers.push_back(std::move(lay));
  }
  d.head1 = make_conv<T>(h.dec_skip, h.dec_skip, 1, 1, Pad::kSame);
  d.head2 = make_conv<T>(h.dec_skip, kMuLawClasses, 1, 1, Pad::kSame);
  return d;
}

template <typename T>
struct DecCache {
  std::vector<Mat<T>> layer_in;   // x entering each layer
  std::vector<Mat<T>> tanh_act;   // tanh(filter half)
  std::vector<Mat<T>> sig_act;    // sigmoid(gate half)
  Mat<T> skip_sum;                // skip x n
  Mat<T> head1_pre;               // pre second ReLU
  Mat<T> z;                       // conditioning latent
  std::vector<int> targets;
};

/// Teacher-forced pass: column t sees targets[0..t-1] and the latent.
/// targets.size() must equal pool_kernel * z.cols().
template <typename T>
Mat<T> decoder_forward(const Decoder<T>& d, const Hyper& h, const Mat<T>& z,
                       const std::vector<int>& targets, DecCache<T>* cache) {
  const auto n = static_cast<Eigen::Index>(targets.size());
  if (n != z.cols() * h.pool_kernel)
    throw std::invalid_argument(
        "decoder_forward: target length " + std::to_string(n) + " != " +
        std::to_string(z.cols() * h.pool_kernel) + " (pool * frames)");
  const int r = h.dec_residual;
  if (cache) {
    cache->layer_in.clear();
    cache->tanh_act.clear();
    cache->sig_act.clear();
    cache->z = z;
    cache->targets = targets;
  }

  // Zero-history primer: column 0 sees no previous sample.
  Mat<T> x = Mat<T>::Zero(r, n);
  for (Eigen::Index t = 1; t < n; t++) x.col(t) = d.embed.col(targets[t - 1]);

  Mat<T> skip_sum = Mat<T>::Zero(h.dec_skip, n);
  for (const auto& lay : d.layers) {
    if (cache) cache->layer_in.push_back(x);
    Mat<T> u = conv_forward(lay.dilated, x);
    Mat<T> cond_f = lay.cond * z;  // 2r x frames, replicated per frame
    for (Eigen::Index f = 0; f < z.cols(); f++)
      u.middleCols(f * h.pool_kernel, h.pool_kernel).colwise() +=
          Eigen::Matrix<T, Eigen::Dynamic, 1>(cond_f.col(f));
    Mat<T> tf = u.topRows(r).array().tanh();
    Mat<T> sg = (T(1) / (T(1) + (-u.bottomRows(r)).array().exp())).matrix();
    Mat<T> gated = tf.cwiseProduct(sg);
    if (cache) {
      cache->tanh_act.push_back(std::move(tf));
      cache->sig_act.push_back(std::move(sg));
    }
    x += conv_forward(lay.res, gated);
    skip_sum += conv_forward(lay.skip, gated);
  }
  if (cache) cache->skip_sum = skip_sum;
  Mat<T> h0 = relu(skip_sum);
  Mat<T> h1pre = conv_forward(d.head1, h0);
  if (cache) cache->head1_pre = h1pre;
  return conv_forward(d.head2, relu(h1pre));
}

/// dz is accumulated (caller keeps one dz across decoder + classifier paths);
/// dembed_in, when non-null, receives the gradient w.r.t. the embedded input
/// activations (used by the receptive-field probes).
template <typename T>
void decoder_backward(const Decoder<T>& d, const Hyper& h, const DecCache<T>& cache,
                      const Mat<T>& dlogits, Decoder<T>* g, Mat<T>* dz,
                      Mat<T>* dembed_in) {
  const auto n = dlogits.cols();
  const int r = h.dec_residual;
  const auto frames = cache.z.cols();

  Mat<T> h1 = relu(cache.head1_pre);
  Mat<T> dh1 = Mat<T>::Zero(h.dec_skip, n);
  conv_backward(d.head2, h1, dlogits, &dh1, g ? &g->head2 : nullptr);
  Mat<T> dh1pre =
      (cache.head1_pre.array() > T(0)).select(dh1, Mat<T>::Zero(h.dec_skip, n));
  Mat<T> h0 = relu(cache.skip_sum);
  Mat<T> dh0 = Mat<T>::Zero(h.dec_skip, n);
  conv_backward(d.head1, h0, dh1pre, &dh0, g ? &g->head1 : nullptr);
  Mat<T> dskip_sum =
      (cache.skip_sum.array() > T(0)).select(dh0, Mat<T>::Zero(h.dec_skip, n));

  Mat<T> dx = Mat<T>::Zero(r, n);
  for (int l = static_cast<int>(d.layers.size()) - 1; l >= 0; l--) {
    const auto& lay = d.layers[l];
    const Mat<T>& tf = cache.tanh_act[l];
    const Mat<T>& sg = cache.sig_act[l];
    Mat<T> gated = tf.cwiseProduct(sg);

    Mat<T> dgated = Mat<T>::Zero(r, n);
    conv_backward(lay.res, gated, dx, &dgated, g ? &g->layers[l].res : nullptr);
    conv_backward(lay.skip, gated, dskip_sum, &dgated, g ? &g->layers[l].skip : nullptr);

    Mat<T> du(2 * r, n);
    du.topRows(r) = dgated.cwiseProduct(sg).cwiseProduct(
        (T(1) - tf.array().square()).matrix());
    du.bottomRows(r) = dgated.cwiseProduct(tf).cwiseProduct(
        sg.cwiseProduct((T(1) - sg.array()).matrix()));

    if (dz || g) {
      Mat<T> du_f(2 * r, frames);
      for (Eigen::Index f = 0; f < frames; f++)
        du_f.col(f) = du.middleCols(f * h.pool_kernel, h.pool_kernel).rowwise().sum();
      if (g) g->layers[l].cond.noalias() += du_f * cache.z.transpose();
      if (dz) dz->noalias() += lay.cond.transpose() * du_f;
    }

    Mat<T> dconv_in = Mat<T>::Zero(r, n);
    conv_backward(lay.dilated, cache.layer_in[l], du, &dconv_in,
                  g ? &g->layers[l].dilated : nullptr);
    dx += dconv_in;  // residual path already lives in dx
  }

  if (g)
    for (Eigen::Index t = 1; t < n; t++)
      g->embed.col(cache.targets[t - 1]) += dx.col(t);
  if (dembed_in) *dembed_in = dx;
}

// ---------------------------------------------------------------------------
// Domain classifier
// ---------------------------------------------------------------------------

template <typename T>
struct Classifier {
  Conv1d<T> c1, c2, c3;  // ELU after c1 and c2; temporal mean after c3
};

template <typename T>
Classifier<T> make_classifier(const Hyper& h) {
  Classifier<T> c;
  c.c1 = make_conv<T>(h.latent_channels, h.cls_width, h.cls_kernel, 1, Pad::kSame);
  c.c2 = make_conv<T>(h.cls_width, h.cls_width, h.cls_kernel, 1, Pad::kSame);
  c.c3 = make_conv<T>(h.cls_width, h.n_domains, h.cls_kernel, 1, Pad::kSame);
  return c;
}

template <typename T>
struct ClsCache {
  Mat<T> z, pre1, pre2;
};

template <typename T>
Mat<T> elu(const Mat<T>& x) {
  return (x.array() > T(0)).select(x, (x.array().exp() - T(1)).matrix());
}

template <typename T>
Mat<T> classifier_forward(const Classifier<T>& c, const Mat<T>& z, ClsCache<T>* cache) {
  if (z.cols() < 1) throw std::invalid_argument("classifier: empty latent");
  Mat<T> pre1 = conv_forward(c.c1, z);
  Mat<T> pre2 = conv_forward(c.c2, elu(pre1));
  Mat<T> out = conv_forward(c.c3, elu(pre2));
  if (cache) {
    cache->z = z;
    cache->pre1 = pre1;
    cache->pre2 = pre2;
  }
  return out.rowwise().mean();  // k x 1
}

template <typename T>
void classifier_backward(const Classifier<T>& c, const ClsCache<T>& cache,
                         const Mat<T>& dlogits, Classifier<T>* g, Mat<T>* dz) {
  const auto n = cache.z.cols();
  Mat<T> dout = dlogits.replicate(1, n) / T(n);
  Mat<T> e2 = elu(cache.pre2);
  Mat<T> de2 = Mat<T>::Zero(e2.rows(), n);
  conv_backward(c.c3, e2, dout, &de2, g ? &g->c3 : nullptr);
  Mat<T> dpre2 = de2.cwiseProduct(
      (cache.pre2.array() > T(0))
          .select(Mat<T>::Ones(e2.rows(), n), (e2.array() + T(1)).matrix()));
  Mat<T> e1 = elu(cache.pre1);
  Mat<T> de1 = Mat<T>::Zero(e1.rows(), n);
  conv_backward(c.c2, e1, dpre2, &de1, g ? &g->c2 : nullptr);
  Mat<T> dpre1 = de1.cwiseProduct(
      (cache.pre1.array() > T(0))
          .select(Mat<T>::Ones(e1.rows(), n), (e1.array() + T(1)).matrix()));
  conv_backward(c.c1, cache.z, dpre1, dz, g ? &g->c1 : nullptr);
}

// ---------------------------------------------------------------------------
// Whole model, parameter traversal, init
// ---------------------------------------------------------------------------

template <typename T>
struct Model {
  Hyper h;
  Encoder<T> enc;
  std::vector<Decoder<T>> dec;  // one per domain
  Classifier<T> cls;
};

template <typename T>
Model<T> make_model(const Hyper& h) {
  Model<T> m;
  m.h = h;
  m.enc = make_encoder<T>(h);
  for (int j = 0; j < h.n_domains; j++) m.dec.push_back(make_decoder<T>(h));
  m.cls = make_classifier<T>(h);
  return m;
}

template <typename T>
struct NamedParam {
  std::string name;
  Mat<T>* p;
};

template <typename T>
void collect_conv(const std::string& prefix, Conv1d<T>& c,
                  std::vector<NamedParam<T>>& out) {
  for (size_t k = 0; k < c.taps.size(); k++)
    out.push_back({prefix + ".w" + std::to_string(k), &c.taps[k]});
  out.push_back({prefix + ".b", &c.bias});
}

template <typename T>
std::vector<NamedParam<T>> collect_params(Encoder<T>& e, const std::string& prefix) {
  std::vector<NamedParam<T>> out;
  collect_conv(prefix + ".input", e.input, out);
  for (size_t l = 0; l < e.layers.size(); l++) {
    collect_conv(prefix + ".l" + std::to_string(l) + ".dilated", e.layers[l].dilated, out);
    collect_conv(prefix + ".l" + std::to_string(l) + ".mix", e.layers[l].mix, out);
  }
  collect_conv(prefix + ".proj", e.proj, out);
  return out;
}

template <typename T>
std::vector<NamedParam<T>> collect_params(Decoder<T>& d, const std::string& prefix) {
  std::vector<NamedParam<T>> out;
  out.push_back({prefix + ".embed", &d.embed});
  for (size_t l = 0; l < d.layers.size(); l++) {
    std::string lp = prefix + ".l" + std::to_string(l);
    collect_conv(lp + ".dilated", d.layers[l].dilated, out);
    out.push_back({lp + ".cond", &d.layers[l].cond});
    collect_conv(lp + ".res", d.layers[l].res, out);
    collect_conv(lp + ".skip", d.layers[l].skip, out);
  }
  collect_conv(prefix + ".head1", d.head1, out);
  collect_conv(prefix + ".head2", d.head2, out);
  return out;
}

template <typename T>
std::vector<NamedParam<T>> collect_params(Classifier<T>& c, const std::string& prefix) {
  std::vector<NamedParam<T>> out;
  collect_conv(prefix + ".c1", c.c1, out);
  collect_conv(prefix + ".c2", c.c2, out);
  collect_conv(prefix + ".c3", c.c3, out);
  return out;
}

template <typename T>
std::vector<NamedParam<T>> collect_params(Model<T>& m) {
  std::vector<NamedParam<T>> out = collect_params(m.enc, "enc");
  for (size_t j = 0; j < m.dec.size(); j++) {
    auto d = collect_params(m.dec[j], "dec" + std::to_string(j));
    out.insert(out.end(), d.begin(), d.end());
  }
  auto c = collect_params(m.cls, "cls");
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

template <typename T>
size_t param_count(Model<T>& m) {
  size_t n = 0;
  for (auto& p : collect_params(m)) n += p.p->size();
  return n;
}

template <typename T>
void fill_uniform(Mat<T>& m, double limit, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); j++)
    for (Eigen::Index i = 0; i < m.rows(); i++)
      m(i, j) = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
void init_conv(Conv1d<T>& c, Rng& rng) {
  // Fan-in scaled uniform, zero biases.
  double limit = std::sqrt(1.0 / (c.in_channels() * c.kernel()));
  for (auto& w : c.taps) fill_uniform(w, limit, rng);
  c.bias.setZero();
}

template <typename T>
void init_model(Model<T>& m, Rng& rng) {
  init_conv(m.enc.input, rng);
  for (auto& l : m.enc.layers) {
    init_conv(l.dilated, rng);
    init_conv(l.mix, rng);
  }
  init_conv(m.enc.proj, rng);
  for (auto& d : m.dec) {
    fill_uniform(d.embed, 1.0, rng);
    for (auto& l : d.layers) {
      init_conv(l.dilated, rng);
      fill_uniform(l.cond, std::sqrt(1.0 / m.h.latent_channels), rng);
      init_conv(l.res, rng);
      init_conv(l.skip, rng);
    }
    init_conv(d.head1, rng);
    init_conv(d.head2, rng);
  }
  init_conv(m.cls.c1, rng);
  init_conv(m.cls.c2, rng);
  init_conv(m.cls.c3, rng);
}

// ---------------------------------------------------------------------------
// Softmax cross entropy
// ---------------------------------------------------------------------------

/// Mean cross entropy over columns, in nats. dlogits (optional) receives the
/// gradient of the mean.
template <typename T>
double softmax_ce(const Mat<T>& logits, const std::vector<int>& targets,
                  Mat<T>* dlogits) {
  const auto n = logits.cols();
  if (static_cast<Eigen::Index>(targets.size()) != n)
    throw std::invalid_argument("softmax_ce: target count mismatch");
  if (dlogits) dlogits->setZero(logits.rows(), n);
  double total = 0;
  for (Eigen::Index t = 0; t < n; t++) {
    auto col = logits.col(t);
    T mx = col.maxCoeff();
    Eigen::Matrix<T, Eigen::Dynamic, 1> ex = (col.array() - mx).exp();
    T sum = ex.sum();
    total += std::log(double(sum)) + double(mx) - double(col(targets[t]));
    if (dlogits) {
      dlogits->col(t) = ex / (sum * T(n));
      (*dlogits)(targets[t], t) -= T(1) / T(n);
    }
  }
  return total / n;
}

/// Cross entropy of a single k-way logit vector (k x 1 matrix).
template <typename T>
double softmax_ce_single(const Mat<T>& logits, int target, Mat<T>* dlogits) {
  return softmax_ce(logits, std::vector<int>{target}, dlogits);
}

}  // namespace umt

#endif  // UMT_NETS_H_
