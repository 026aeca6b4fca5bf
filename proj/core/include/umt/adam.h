// umt/adam.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_ADAM_H_
#define UMT_ADAM_H_

#include <cmath>
#include <vector>

#include "umt/nets.h"

namespace umt {

/// ADAM with per-tensor step counts, so tensors outside the currently
/// trained subset (other domains' decoders) stay bit-identical.
template <typename T>
class Adam {
 public:
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  struct Slot {
    Mat<T> m, v;
    long t = 0;
  };

  void init(const std::vector<NamedParam<T>>& params) {
    slots_.clear();
    for (const auto& p : params) {
      Slot s;
      s.m = Mat<T>::Zero(p.p->rows(), p.p->cols());
      s.v = Mat<T>::Zero(p.p->rows(), p.p->cols());
      slots_.push_back(std::move(s));
    }
  }

  /// Updates the tensors listed in `indices` (into the registration order).
  void update(const std::vector<NamedParam<T>>& params,
              const std::vector<NamedParam<T>>& grads,
              const std::vector<size_t>& indices, double lr) {
    for (size_t i : indices) {
      Slot& s = slots_[i];
      const Mat<T>& g = *grads[i].p;
      s.t++;
      s.m = beta1 * s.m + (1.0 - beta1) * g;
      s.v = beta2 * s.v + (1.0 - beta2) * g.cwiseProduct(g);
      double bc1 = 1.0 - std::pow(beta1, s.t);
      double bc2 = 1.0 - std::pow(beta2, s.t);
      double step = lr / bc1;
      params[i].p->array() -=
          T(step) * s.m.array() /
          ((s.v.array() / T(bc2)).sqrt() + T(eps));
    }
  }

  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

 private:
  std::vector<Slot> slots_;
};

}  // namespace umt

#endif  // UMT_ADAM_H_
