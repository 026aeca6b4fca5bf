// umt/common.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_COMMON_H_
#define UMT_COMMON_H_

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace umt {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using Matf = Mat<float>;
using Matd = Mat<double>;

/// Deterministic RNG. Wraps mt19937_64 but derives all variates itself so
/// that streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 bits of randomness.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    // Rejection-free modulo bias is negligible for n << 2^64; use
    // multiply-shift for uniformity.
    return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }
  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
  }

 private:
  std::mt19937_64 gen_;
};

// Exit codes shared by the CLI: 0 ok, 2 usage/config, 3 runtime.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; i++) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace umt

#endif  // UMT_COMMON_H_
