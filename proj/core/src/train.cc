// umt/train.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/train.h"

#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace umt {
namespace {

Matf to_row(const std::vector<float>& samples) {
  return Eigen::Map<const Matf>(samples.data(), 1, samples.size());
}

void check_finite(double v, const char* term, int domain) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite ") + term + " loss on domain " +
                             std::to_string(domain));
}

}  // namespace

Hyper preset_hyper(const std::string& name) {
  if (name == "toy") return Hyper::toy();
  if (name == "full") return Hyper::full();
  if (name == "tiny") return Hyper::tiny();
  throw ConfigError("unknown model preset '" + name + "' (toy, full, tiny)");
}

void zero_grads(Model<float>& grads) {
  for (auto& p : collect_params(grads)) p.p->setZero();
}

double classifier_loss(Model<float>& model, const std::vector<AudioSegment>& batch,
                       const std::vector<AugmentSpec>& specs, int domain,
                       Model<float>* grads) {
  if (batch.size() != specs.size())
    throw std::invalid_argument("classifier_loss: one augment spec per clip required");
  const auto b = static_cast<double>(batch.size());
  double total = 0;
  for (size_t i = 0; i < batch.size(); i++) {
    AudioSegment distorted = apply_pitch_distortion(batch[i], specs[i]);
    Matf enc_in = to_row(mu_law_roundtrip(distorted.samples));
    Matf z = encode_forward(model.enc, model.h, enc_in, (EncCache<float>*)nullptr);
    ClsCache<float> cc;
    Matf logits = classifier_forward(model.cls, z, &cc);
    Matf dl;
    total += softmax_ce_single(logits, domain, grads ? &dl : nullptr);
    if (grads) {
      dl /= static_cast<float>(b);
      classifier_backward(model.cls, cc, dl, &grads->cls, (Matf*)nullptr);
    }
  }
  return total / b;
}

AeLoss autoencoder_loss(Model<float>& model, const std::vector<AudioSegment>& batch,
                        const std::vector<AugmentSpec>& specs, int domain,
                        double lambda, Model<float>* grads) {
  if (batch.size() != specs.size())
    throw std::invalid_argument("autoencoder_loss: one augment spec per clip required");
  if (domain < 0 || domain >= static_cast<int>(model.dec.size()))
    throw std::invalid_argument("autoencoder_loss: unknown domain " +
                                std::to_string(domain));
  const auto b = static_cast<float>(batch.size());
  AeLoss loss;
  for (size_t i = 0; i < batch.size(); i++) {
    // The encoder sees the distorted clip; the decoder is teacher-forced on
    // the undistorted targets.
    AudioSegment distorted = apply_pitch_distortion(batch[i], specs[i]);
    Matf enc_in = to_row(mu_law_roundtrip(distorted.samples));

    EncCache<float> ec;
    Matf z = encode_forward(model.enc, model.h, enc_in, grads ? &ec : nullptr);
    const auto n_dec = z.cols() * model.h.pool_kernel;
    std::vector<int> targets = mu_law_encode(batch[i].samples);
    targets.resize(n_dec);

    DecCache<float> dc;
    Matf logits = decoder_forward(model.dec[domain], model.h, z, targets,
                                  grads ? &dc : nullptr);
    Matf dlogits;
    double recon = softmax_ce(logits, targets, grads ? &dlogits : nullptr);

    ClsCache<float> cc;
    Matf clogits = classifier_forward(model.cls, z, (grads && lambda != 0) ? &cc : nullptr);
    Matf dcl;
    double conf = softmax_ce_single(clogits, domain,
                                    (grads && lambda != 0) ? &dcl : nullptr);

    loss.recon += recon / b;
    loss.confusion += conf / b;

    if (grads) {
      Matf dz = Matf::Zero(z.rows(), z.cols());
      dlogits /= b;
      decoder_backward(model.dec[domain], model.h, dc, dlogits, &grads->dec[domain],
                       &dz, (Matf*)nullptr);
      if (lambda != 0) {
        // Adversarial pressure: the encoder descends -lambda * CE(C(z), j).
        Matf dzc = Matf::Zero(z.rows(), z.cols());
        classifier_backward(model.cls, cc, dcl, (Classifier<float>*)nullptr, &dzc);
        dz -= static_cast<float>(lambda) / b * dzc;
      }
      encode_backward(model.enc, model.h, ec, dz, &grads->enc, (Matf*)nullptr);
    }
  }
  loss.total = loss.recon - lambda * loss.confusion;
  return loss;
}

Trainer::Trainer(const TrainConfig& cfg, const Hyper& h,
                 std::vector<std::string> domains)
    : cfg_(cfg), model_(make_model<float>(h)), grads_(make_model<float>(h)),
      rng_(cfg.seed) {
  if (static_cast<int>(domains.size()) != h.n_domains)
    throw ConfigError("domain list size does not match n_domains");
  init_model(model_, rng_);
  auto params = collect_params(model_);
  opt_.init(params);
  dec_idx_.resize(h.n_domains);
  for (size_t i = 0; i < params.size(); i++) {
    const std::string& n = params[i].name;
    if (n.rfind("enc", 0) == 0) enc_idx_.push_back(i);
    else if (n.rfind("cls", 0) == 0) cls_idx_.push_back(i);
    else if (n.rfind("dec", 0) == 0) {
      size_t dot = n.find('.');
      int j = std::stoi(n.substr(3, dot - 3));
      dec_idx_[j].push_back(i);
    }
  }
  domains_ = std::move(domains);
}

double Trainer::current_lr() const {
  return cfg_.lr * std::pow(cfg_.lr_decay,
                            static_cast<double>(clips_ / cfg_.decay_every_clips));
}

StepReport Trainer::train_step(const std::vector<AudioSegment>& batch, int domain) {
  const double lr = current_lr();
  std::vector<AugmentSpec> specs;
  specs.reserve(batch.size());
  for (const auto& clip : batch)
    specs.push_back(draw_augment_spec(clip.duration_s(), rng_));

  auto params = collect_params(model_);
  auto gparams = collect_params(grads_);

  // Eq. 2 first: the discriminator trains against the current encoder.
  double cls_ce = 0;
  for (int it = 0; it < cfg_.disc_steps; it++) {
    zero_grads(grads_);
    cls_ce = classifier_loss(model_, batch, specs, domain, &grads_);
    check_finite(cls_ce, "classifier", domain);
    opt_.update(params, gparams, cls_idx_, lr);
  }

  // Eq. 1 against the updated discriminator.
  zero_grads(grads_);
  AeLoss ae = autoencoder_loss(model_, batch, specs, domain, cfg_.lambda, &grads_);
  check_finite(ae.recon, "reconstruction", domain);
  check_finite(ae.confusion, "confusion", domain);
  opt_.update(params, gparams, enc_idx_, lr);
  opt_.update(params, gparams, dec_idx_[domain], lr);

  clips_ += static_cast<long long>(batch.size());
  step_++;

  StepReport r;
  r.step = step_;
  r.domain = domain;
  r.recon_ce = ae.recon;
  r.confusion_ce = ae.confusion;
  r.classifier_ce = cls_ce;
  r.lr = lr;
  return r;
}

Checkpoint Trainer::to_checkpoint() const {
  Checkpoint ck;
  ck.model = model_;
  ck.domains = domains_;
  ck.has_train_state = true;
  for (const auto& s : opt_.slots()) {
    ck.opt_m.push_back(s.m);
    ck.opt_v.push_back(s.v);
    ck.opt_t.push_back(s.t);
  }
  ck.step = step_;
  ck.clips = clips_;
  ck.rng_state = rng_.serialize();
  return ck;
}

void Trainer::restore(const Checkpoint& ck) {
  auto dst = collect_params(model_);
  auto src = collect_params(const_cast<Model<float>&>(ck.model));
  if (dst.size() != src.size())
    throw ConfigError("checkpoint does not match configured model");
  for (size_t i = 0; i < dst.size(); i++) {
    if (dst[i].p->rows() != src[i].p->rows() || dst[i].p->cols() != src[i].p->cols())
      throw ConfigError("checkpoint tensor shape mismatch: " + dst[i].name);
    *dst[i].p = *src[i].p;
  }
  if (ck.has_train_state) {
    auto& slots = opt_.slots();
    for (size_t i = 0; i < slots.size(); i++) {
      slots[i].m = ck.opt_m[i];
      slots[i].v = ck.opt_v[i];
      slots[i].t = ck.opt_t[i];
    }
    rng_.deserialize(ck.rng_state);
    step_ = ck.step;
    clips_ = ck.clips;
  }
  domains_ = ck.domains;
}

std::string train_loop(const TrainConfig& cfg, const Corpus& corpus,
                       const std::function<void(const StepReport&)>& log,
                       const std::atomic<bool>* stop, ClipSampler* sampler_out) {
  Hyper h = preset_hyper(cfg.preset);
  h.n_domains = static_cast<int>(corpus.domain_names.size());
  for (int d = 0; d < h.n_domains; d++)
    if (corpus.train_tracks(d).empty())
      throw ConfigError("domain '" + corpus.domain_names[d] + "' has no train tracks");

  Trainer trainer(cfg, h, corpus.domain_names);
  std::filesystem::create_directories(cfg.out_dir);
  std::string ckpt_path = cfg.out_dir + "/last.ckpt";
  if (cfg.resume && std::filesystem::exists(ckpt_path))
    trainer.restore(load_checkpoint(ckpt_path));

  ClipSampler local_sampler(corpus, h.sample_rate);
  ClipSampler& sampler = sampler_out ? *sampler_out : local_sampler;

  while (trainer.step() < cfg.max_steps) {
    int domain = static_cast<int>(trainer.step() % h.n_domains);
    auto clips = sampler.sample_batch(domain, cfg.batch_size, cfg.clip_len,
                                      trainer.rng());
    std::vector<AudioSegment> batch;
    batch.reserve(clips.size());
    for (auto& c : clips) batch.push_back(std::move(c.clip));

    StepReport report = trainer.train_step(batch, domain);
    if (log) log(report);

    bool interrupted = stop && stop->load();
    if (interrupted || trainer.step() % cfg.checkpoint_every == 0 ||
        trainer.step() == cfg.max_steps)
      save_checkpoint(trainer.to_checkpoint(), ckpt_path);
    if (interrupted) break;
  }
  save_checkpoint(trainer.to_checkpoint(), ckpt_path);
  return ckpt_path;
}

}  // namespace umt
