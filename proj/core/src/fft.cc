// umt/fft.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/fft.h"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace umt {

Fft::Fft(int n) : n_(n) {
  buf_real_ = fftwf_alloc_real(n);
  buf_cplx_ = fftwf_alloc_complex(n / 2 + 1);
  fwd_ = fftwf_plan_dft_r2c_1d(n, buf_real_, static_cast<fftwf_complex*>(buf_cplx_),
                               FFTW_ESTIMATE);
  inv_ = fftwf_plan_dft_c2r_1d(n, static_cast<fftwf_complex*>(buf_cplx_), buf_real_,
                               FFTW_ESTIMATE);
}

Fft::~Fft() {
  fftwf_destroy_plan(static_cast<fftwf_plan>(fwd_));
  fftwf_destroy_plan(static_cast<fftwf_plan>(inv_));
  fftwf_free(buf_real_);
  fftwf_free(buf_cplx_);
}

void Fft::forward(const float* in, std::complex<float>* out) const {
  std::memcpy(buf_real_, in, sizeof(float) * n_);
  fftwf_execute(static_cast<fftwf_plan>(fwd_));
  std::memcpy(out, buf_cplx_, sizeof(std::complex<float>) * bins());
}

void Fft::inverse(const std::complex<float>* in, float* out) const {
  std::memcpy(buf_cplx_, in, sizeof(std::complex<float>) * bins());
  fftwf_execute(static_cast<fftwf_plan>(inv_));
  for (int i = 0; i < n_; i++) out[i] = buf_real_[i] / n_;
}

double dominant_frequency(const std::vector<float>& x, double sample_rate) {
  int n = static_cast<int>(x.size());
  Fft fft(n);
  std::vector<float> w(n);
  for (int i = 0; i < n; i++)
    w[i] = x[i] * static_cast<float>(0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
  std::vector<std::complex<float>> spec(fft.bins());
  fft.forward(w.data(), spec.data());
  int best = 1;
  double best_mag = 0;
  for (int k = 1; k + 1 < fft.bins(); k++) {
    double m = std::abs(spec[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  // Parabolic interpolation on log magnitude around the peak bin.
  auto lm = [&](int k) { return std::log(std::abs(spec[k]) + 1e-30); };
  double a = lm(best - 1), b = lm(best), c = lm(best + 1);
  double denom = a - 2 * b + c;
  double delta = std::abs(denom) > 1e-12 ? 0.5 * (a - c) / denom : 0.0;
  return (best + delta) * sample_rate / n;
}

}  // namespace umt
