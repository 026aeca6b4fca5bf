// tests/test_nets.cc
//
// Encoder / decoder / classifier forward-backward checks: shape contracts,
// an independent convolution oracle, the finite-difference gradient oracle
// in double precision, causality cones and shift equivariance.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include <cmath>

#include "doctest.h"
#include "umt/nets.h"

using namespace umt;

namespace {

template <typename T>
Mat<T> random_mat(int r, int c, Rng& rng, double scale = 1.0) {
  Mat<T> m(r, c);
  for (int j = 0; j < c; j++)
    for (int i = 0; i < r; i++) m(i, j) = static_cast<T>(rng.uniform(-scale, scale));
  return m;
}

// Direct triple-loop convolution, the oracle for conv_forward.
template <typename T>
Mat<T> conv_naive(const Conv1d<T>& c, const Mat<T>& x) {
  const auto n = x.cols();
  Mat<T> y = c.bias.replicate(1, n);
  for (int k = 0; k < c.kernel(); k++)
    for (Eigen::Index t = 0; t < n; t++) {
      Eigen::Index src = t + c.offset(k);
      if (src < 0 || src >= n) continue;
      y.col(t) += c.taps[k] * x.col(src);
    }
  return y;
}

// Scalar objective used by the finite-difference oracle: reconstruction CE
// plus down-weighted domain CE, exercising every module at once.
double oracle_loss(Model<double>& m, const Matd& input, const std::vector<int>& targets,
                   Model<double>* grads) {
  EncCache<double> ec;
  Matd z = encode_forward(m.enc, m.h, input, grads ? &ec : nullptr);
  DecCache<double> dc;
  Matd logits = decoder_forward(m.dec[0], m.h, z, targets, grads ? &dc : nullptr);
  Matd dlogits;
  double recon = softmax_ce(logits, targets, grads ? &dlogits : nullptr);
  ClsCache<double> cc;
  Matd clogits = classifier_forward(m.cls, z, grads ? &cc : nullptr);
  Matd dcl;
  double conf = softmax_ce_single(clogits, 1, grads ? &dcl : nullptr);
  const double w = 0.5;
  if (grads) {
    Matd dz = Matd::Zero(z.rows(), z.cols());
    decoder_backward(m.dec[0], m.h, dc, dlogits, &grads->dec[0], &dz, (Matd*)nullptr);
    Matd dzc = Matd::Zero(z.rows(), z.cols());
    dcl *= w;
    classifier_backward(m.cls, cc, dcl, &grads->cls, &dzc);
    dz += dzc;
    encode_backward(m.enc, m.h, ec, dz, &grads->enc, (Matd*)nullptr);
  }
  return recon + w * conf;
}

Model<double> random_tiny_model(uint64_t seed) {
  Model<double> m = make_model<double>(Hyper::tiny());
  Rng rng(seed);
  init_model(m, rng);
  // init_model zeroes biases; randomize them so their gradients are probed
  // from a generic point too.
  for (auto& p : collect_params(m))
    if (p.name.ends_with(".b")) *p.p = random_mat<double>(
        static_cast<int>(p.p->rows()), static_cast<int>(p.p->cols()), rng, 0.1);
  return m;
}

}  // namespace

TEST_CASE("conv: matches the direct-summation oracle") {
  Rng rng(11);
  for (auto pad : {Pad::kSame, Pad::kCausal}) {
    for (int dil : {1, 2, 4}) {
      Conv1d<double> c = make_conv<double>(3, 5, pad == Pad::kCausal ? 2 : 3, dil, pad);
      for (auto& w : c.taps) w = random_mat<double>(5, 3, rng);
      c.bias = random_mat<double>(5, 1, rng);
      Matd x = random_mat<double>(3, 17, rng);
      Matd fast = conv_forward(c, x);
      Matd slow = conv_naive(c, x);
      CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("conv: causal padding never reads the future") {
  Conv1d<double> c = make_conv<double>(1, 1, 2, 4, Pad::kCausal);
  c.taps[0](0, 0) = 1.0;  // the tap 4 steps back
  c.taps[1](0, 0) = 0.0;  // the current-sample tap
  Matd x = Matd::Zero(1, 10);
  x(0, 9) = 1.0;
  Matd y = conv_forward(c, x);
  for (int t = 0; t < 10; t++) CHECK(y(0, t) == 0.0);  // influence only at t=13
}

TEST_CASE("encoder: 16000 samples pool to 20 latent frames of 64 channels") {
  Hyper h = Hyper::toy();
  Model<float> m = make_model<float>(h);
  Rng rng(1);
  init_model(m, rng);
  Matf input = random_mat<float>(1, 16000, rng, 0.5);
  Matf z = encode_forward(m.enc, h, input, (EncCache<float>*)nullptr);
  CHECK(z.rows() == 64);
  CHECK(z.cols() == 20);
  Matf short_in = input.leftCols(800);
  Matf z1 = encode_forward(m.enc, h, short_in, (EncCache<float>*)nullptr);
  CHECK(z1.cols() == 1);
  Matf too_short = input.leftCols(799);
  CHECK_THROWS(encode_forward(m.enc, h, too_short, (EncCache<float>*)nullptr));
}

TEST_CASE("encoder: zero weights give zero latent") {
  Hyper h = Hyper::tiny();
  Model<float> m = make_model<float>(h);  // all parameters zero
  Rng rng(2);
  Matf input = random_mat<float>(1, 64, rng);
  Matf z = encode_forward(m.enc, h, input, (EncCache<float>*)nullptr);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("decoder: rejects mismatched target length") {
  Hyper h = Hyper::tiny();
  Model<float> m = make_model<float>(h);
  Matf z = Matf::Zero(h.latent_channels, 2);
  std::vector<int> targets(15, 0);  // needs 16
  CHECK_THROWS(decoder_forward(m.dec[0], h, z, targets, (DecCache<float>*)nullptr));
}

TEST_CASE("softmax: uniform logits cost ln k, gradient columns sum to zero") {
  Matd logits = Matd::Zero(256, 4);
  std::vector<int> targets{0, 100, 200, 255};
  Matd d;
  double ce = softmax_ce(logits, targets, &d);
  CHECK(ce == doctest::Approx(std::log(256.0)).epsilon(1e-12));
  for (int t = 0; t < 4; t++) CHECK(std::abs(d.col(t).sum()) < 1e-14);
}

TEST_CASE("gradient oracle: analytic vs central finite differences") {
  Model<double> m = random_tiny_model(5);
  Rng rng(6);
  const int n = 16;  // two latent frames at pool 8
  Matd input = random_mat<double>(1, n, rng, 0.8);
  std::vector<int> targets;
  for (int t = 0; t < n; t++)
    targets.push_back(static_cast<int>(rng.uniform_int(kMuLawClasses)));

  Model<double> grads = make_model<double>(m.h);
  oracle_loss(m, input, targets, &grads);

  auto params = collect_params(m);
  auto gparams = collect_params(grads);
  const double h = 1e-5;
  double worst = 0;
  long checked = 0;
  for (size_t i = 0; i < params.size(); i++) {
    Mat<double>& p = *params[i].p;
    const Mat<double>& g = *gparams[i].p;
    for (Eigen::Index c = 0; c < p.cols(); c++)
      for (Eigen::Index r = 0; r < p.rows(); r++) {
        double keep = p(r, c);
        p(r, c) = keep + h;
        double lp = oracle_loss(m, input, targets, nullptr);
        p(r, c) = keep - h;
        double lm = oracle_loss(m, input, targets, nullptr);
        p(r, c) = keep;
        double fd = (lp - lm) / (2 * h);
        double rel = std::abs(g(r, c) - fd) /
                     std::max({std::abs(g(r, c)), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
        checked++;
      }
  }
  MESSAGE("checked ", checked, " parameters, worst relative error ", worst);
  CHECK(checked > 1000);
  CHECK(worst <= 1e-4);
}

TEST_CASE("gradient oracle: encoder input gradient") {
  Model<double> m = random_tiny_model(8);
  Rng rng(9);
  const int n = 16;
  Matd input = random_mat<double>(1, n, rng, 0.8);
  std::vector<int> targets;
  for (int t = 0; t < n; t++)
    targets.push_back(static_cast<int>(rng.uniform_int(kMuLawClasses)));

  EncCache<double> ec;
  Matd z = encode_forward(m.enc, m.h, input, &ec);
  DecCache<double> dc;
  Matd logits = decoder_forward(m.dec[0], m.h, z, targets, &dc);
  Matd dlogits;
  softmax_ce(logits, targets, &dlogits);
  Matd dz = Matd::Zero(z.rows(), z.cols());
  decoder_backward(m.dec[0], m.h, dc, dlogits, (Decoder<double>*)nullptr, &dz,
                   (Matd*)nullptr);
  Matd dinput = Matd::Zero(1, n);
  encode_backward(m.enc, m.h, ec, dz, (Encoder<double>*)nullptr, &dinput);

  const double h = 1e-5;
  for (int t = 0; t < n; t++) {
    Matd pert = input;
    pert(0, t) += h;
    Matd zp = encode_forward(m.enc, m.h, pert, (EncCache<double>*)nullptr);
    double lp = softmax_ce(decoder_forward(m.dec[0], m.h, zp, targets,
                                           (DecCache<double>*)nullptr),
                           targets, (Matd*)nullptr);
    pert(0, t) -= 2 * h;
    Matd zm = encode_forward(m.enc, m.h, pert, (EncCache<double>*)nullptr);
    double lm = softmax_ce(decoder_forward(m.dec[0], m.h, zm, targets,
                                           (DecCache<double>*)nullptr),
                           targets, (Matd*)nullptr);
    double fd = (lp - lm) / (2 * h);
    CHECK(std::abs(dinput(0, t) - fd) /
              std::max({std::abs(fd), std::abs(dinput(0, t)), 1e-6}) <=
          1e-4);
  }
}

TEST_CASE("decoder causality: the gradient cone is exactly the receptive field") {
  // Medium stack whose cone fits in a cheap probe: 2 blocks x 6 layers,
  // receptive field 2*(2^6-1)+1 = 127.
  Hyper h = Hyper::tiny();
  h.dec_blocks = 2;
  h.dec_layers_per_block = 6;
  h.pool_kernel = 8;
  Model<float> m = make_model<float>(h);
  Rng rng(3);
  init_model(m, rng);
  REQUIRE(h.receptive_field() == 127);

  const int n = 256;
  Matf z = random_mat<float>(h.latent_channels, n / h.pool_kernel, rng);
  std::vector<int> targets;
  for (int t = 0; t < n; t++)
    targets.push_back(static_cast<int>(rng.uniform_int(kMuLawClasses)));
  DecCache<float> dc;
  Matf logits = decoder_forward(m.dec[0], h, z, targets, &dc);

  for (int probe : {130, 180, 255}) {
    Matf dlogits = Matf::Zero(logits.rows(), n);
    dlogits(7, probe) = 1.0f;
    Matf dx;
    decoder_backward(m.dec[0], h, dc, dlogits, (Decoder<float>*)nullptr,
                     (Matf*)nullptr, &dx);
    int lo = probe - (h.receptive_field() - 1);
    for (int t = 0; t < n; t++) {
      bool inside = t >= lo && t <= probe;
      if (!inside) CHECK(dx.col(t).cwiseAbs().maxCoeff() == 0.0f);
    }
    // The cone boundary itself carries signal.
    CHECK(dx.col(lo).cwiseAbs().maxCoeff() > 0.0f);
    CHECK(dx.col(probe).cwiseAbs().maxCoeff() > 0.0f);
  }
}

TEST_CASE("default decoder receptive field is 4093 samples") {
  CHECK(Hyper::full().receptive_field() == 4093);
  Hyper h = Hyper::full();
  h.dec_residual = 16;  // width does not change the cone
  CHECK(h.receptive_field() == 4093);
}

TEST_CASE("encoder shift equivariance: 800-sample shifts move the latent one frame") {
  Hyper h = Hyper::toy();
  Model<float> m = make_model<float>(h);
  Rng rng(4);
  init_model(m, rng);
  Matf input = random_mat<float>(1, 8000, rng, 0.5);

  Matf z0 = encode_forward(m.enc, h, input, (EncCache<float>*)nullptr);
  for (int shift_frames : {1, 3}) {
    const int s = shift_frames * h.pool_kernel;
    Matf shifted(1, 8000);
    shifted.leftCols(s).setZero();
    shifted.rightCols(8000 - s) = input.leftCols(8000 - s);
    Matf zs = encode_forward(m.enc, h, shifted, (EncCache<float>*)nullptr);
    // Compare overlapping frames away from both edges. The encoder's
    // same-padding receptive field is ~4.1k samples, i.e. several frames.
    const int guard = 6;
    float worst = 0;
    for (int f = guard; f < z0.cols() - guard - shift_frames; f++)
      worst = std::max(worst,
                       (zs.col(f + shift_frames) - z0.col(f)).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-4f);
  }
}

TEST_CASE("classifier: zero weights give uniform domain posterior") {
  Hyper h = Hyper::tiny();
  Classifier<float> c = make_classifier<float>(h);
  Matf z = Matf::Random(h.latent_channels, 5);
  Matf logits = classifier_forward(c, z, (ClsCache<float>*)nullptr);
  REQUIRE(logits.rows() == h.n_domains);
  REQUIRE(logits.cols() == 1);
  CHECK(logits.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("init: deterministic given the seed") {
  Hyper h = Hyper::tiny();
  Model<float> a = make_model<float>(h);
  Model<float> b = make_model<float>(h);
  Rng ra(77), rb(77);
  init_model(a, ra);
  init_model(b, rb);
  auto pa = collect_params(a), pb = collect_params(b);
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); i++) CHECK(*pa[i].p == *pb[i].p);
}

TEST_CASE("params: names are unique and cover every tensor") {
  Model<float> m = make_model<float>(Hyper::tiny());
  auto params = collect_params(m);
  std::vector<std::string> names;
  for (auto& p : params) names.push_back(p.name);
  std::sort(names.begin(), names.end());
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
  CHECK(param_count(m) > 1000);
}
