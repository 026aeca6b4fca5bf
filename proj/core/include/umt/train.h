// umt/train.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_TRAIN_H_
#define UMT_TRAIN_H_

#include <atomic>
#include <functional>
#include <string>
#include <vector>

#include "umt/adam.h"
#include "umt/augment.h"
#include "umt/checkpoint.h"
#include "umt/data.h"
#include "umt/nets.h"

namespace umt {

struct TrainConfig {
  std::string corpus_root;
  std::string out_dir;
  std::string preset = "toy";  // toy | full | tiny
  double lambda = 1e-2;
  double lr = 1e-3;
  double lr_decay = 0.98;
  int decay_every_clips = 10000;  // one-second clips, the paper's "samples"
  int batch_size = 16;
  double clip_len = 1.0;
  long max_steps = 1000;
  int checkpoint_every = 500;
  int disc_steps = 1;  // discriminator updates per autoencoder update
  uint64_t seed = 0;
  double split_ratio = 0.8;
  bool resume = false;
};

Hyper preset_hyper(const std::string& name);

struct StepReport {
  long step = 0;
  int domain = 0;
  double recon_ce = 0;       // nats per sample
  double confusion_ce = 0;   // classifier CE seen by the encoder (Eq. 1 term)
  double classifier_ce = 0;  // classifier's own objective (Eq. 2)
  double lr = 0;
};

struct AeLoss {
  double recon = 0, confusion = 0, total = 0;
};

/// Eq. 1 for one single-domain batch: mean-per-sample reconstruction CE of
/// the teacher-forced decoder against the undistorted targets, minus
/// lambda times the classifier CE on the (distorted-input) latents.
/// When grads is non-null, encoder and domain-decoder gradients of the
/// batch-mean loss are accumulated into it.
AeLoss autoencoder_loss(Model<float>& model, const std::vector<AudioSegment>& batch,
                        const std::vector<AugmentSpec>& specs, int domain,
                        double lambda, Model<float>* grads = nullptr);

/// Eq. 2: classifier CE on the same latents. Encoder outputs are treated as
/// fixed inputs; only classifier gradients are ever written.
double classifier_loss(Model<float>& model, const std::vector<AudioSegment>& batch,
                       const std::vector<AugmentSpec>& specs, int domain,
                       Model<float>* grads = nullptr);

void zero_grads(Model<float>& grads);

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const Hyper& h, std::vector<std::string> domains);

  /// One alternating step: classifier update(s) first, then encoder +
  /// domain decoder, both with ADAM at the current scheduled lr.
  StepReport train_step(const std::vector<AudioSegment>& batch, int domain);

  double current_lr() const;
  long step() const { return step_; }
  long long clips_processed() const { return clips_; }

  Model<float>& model() { return model_; }
  Rng& rng() { return rng_; }

  Checkpoint to_checkpoint() const;
  void restore(const Checkpoint& ck);

 private:
  TrainConfig cfg_;
  Model<float> model_;
  Model<float> grads_;
  Adam<float> opt_;
  std::vector<size_t> cls_idx_, enc_idx_;
  std::vector<std::vector<size_t>> dec_idx_;
  std::vector<std::string> domains_;
  long step_ = 0;
  long long clips_ = 0;
  Rng rng_;
};

/// Round-robin over domains, one single-domain batch each; periodic
/// checkpoints named "last.ckpt" in cfg.out_dir. Returns the final
/// checkpoint path. stop (optional) requests a snapshot-then-exit.
std::string train_loop(const TrainConfig& cfg, const Corpus& corpus,
                       const std::function<void(const StepReport&)>& log,
                       const std::atomic<bool>* stop = nullptr,
                       ClipSampler* sampler_out = nullptr);

}  // namespace umt

#endif  // UMT_TRAIN_H_
