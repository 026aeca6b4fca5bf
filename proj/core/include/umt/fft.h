// umt/fft.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_FFT_H_
#define UMT_FFT_H_

#include <complex>
#include <vector>

namespace umt {

/// Real FFT of a fixed size, wrapping FFTW single precision plans.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  void forward(const float* in, std::complex<float>* out) const;
  /// Inverse transform scaled by 1/n.
  void inverse(const std::complex<float>* in, float* out) const;

 private:
  int n_;
  void* fwd_;
  void* inv_;
  float* buf_real_;
  void* buf_cplx_;
};

/// Frequency of the strongest spectral peak (Hann window, parabolic
/// interpolation on log magnitude).
double dominant_frequency(const std::vector<float>& x, double sample_rate);

}  // namespace umt

#endif  // UMT_FFT_H_
