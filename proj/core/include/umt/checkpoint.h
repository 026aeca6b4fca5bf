// umt/checkpoint.h
//
// Versioned binary model container. Layout (little endian):
//   magic "UMTC", u32 format version
//   u32 header length, JSON header (hyperparameters, domain names, counters)
//   u64 tensor count, then per tensor:
//     u32 name length, name bytes, u64 rows, u64 cols, f32 data (col-major)
//   u8 has_train_state; if set, per tensor in the same order:
//     i64 adam step, f32 m data, f32 v data
//   and a u32-length RNG state string.
// A human-readable sidecar "<path>.json" repeats the JSON header.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_CHECKPOINT_H_
#define UMT_CHECKPOINT_H_

#include <string>
#include <vector>

#include "umt/nets.h"

namespace umt {

struct Checkpoint {
  Model<float> model;
  std::vector<std::string> domains;

  bool has_train_state = false;
  // Aligned with collect_params(model).
  std::vector<Matf> opt_m, opt_v;
  std::vector<long> opt_t;
  long step = 0;
  long long clips = 0;
  std::string rng_state;
};

/// Atomic write (temp file + rename) plus the sidecar manifest.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// FNV-1a of the file bytes, recorded in translation sidecar metadata.
uint64_t file_hash(const std::string& path);

int domain_index(const std::vector<std::string>& domains, const std::string& name);

}  // namespace umt

#endif  // UMT_CHECKPOINT_H_
