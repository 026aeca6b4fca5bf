// umt/resample.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_RESAMPLE_H_
#define UMT_RESAMPLE_H_

#include <vector>

namespace umt {

/// Windowed-sinc resampling (64 taps at unit scale, Hann window).
/// Output length is floor(n * out_rate / in_rate).
std::vector<float> resample(const std::vector<float>& x, double in_rate,
                            double out_rate);

/// Reads the input at the given speed: y[i] = x(i * speed). Frequencies are
/// multiplied by `speed` when the output is played back at the input rate.
/// Output length is floor(n / speed).
std::vector<float> resample_speed(const std::vector<float>& x, double speed);

}  // namespace umt

#endif  // UMT_RESAMPLE_H_
