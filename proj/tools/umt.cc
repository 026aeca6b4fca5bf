// tools/umt.cc
//
// Operator entry point: train, translate, blend, eval, make-synth-corpus.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "umt/augment.h"
#include "umt/infer.h"
#include "umt/metrics.h"
#include "umt/train.h"
#include "umt/wav.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};
void sigint_handler(int) { g_stop.store(true); }

std::string timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

json config_to_json(const umt::TrainConfig& c) {
  return json{{"corpus_root", c.corpus_root},
              {"out_dir", c.out_dir},
              {"preset", c.preset},
              {"lambda", c.lambda},
              {"lr", c.lr},
              {"lr_decay", c.lr_decay},
              {"decay_every_clips", c.decay_every_clips},
              {"batch_size", c.batch_size},
              {"clip_len", c.clip_len},
              {"max_steps", c.max_steps},
              {"checkpoint_every", c.checkpoint_every},
              {"disc_steps", c.disc_steps},
              {"seed", c.seed},
              {"split_ratio", c.split_ratio},
              {"resume", c.resume}};
}

void config_from_json(const json& j, umt::TrainConfig& c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
  };
  get("corpus_root", c.corpus_root);
  get("out_dir", c.out_dir);
  get("preset", c.preset);
  get("lambda", c.lambda);
  get("lr", c.lr);
  get("lr_decay", c.lr_decay);
  get("decay_every_clips", c.decay_every_clips);
  get("batch_size", c.batch_size);
  get("clip_len", c.clip_len);
  get("max_steps", c.max_steps);
  get("checkpoint_every", c.checkpoint_every);
  get("disc_steps", c.disc_steps);
  get("seed", c.seed);
  get("split_ratio", c.split_ratio);
  get("resume", c.resume);
}

void write_pgm_heatmap(const Eigen::MatrixXd& m, const std::string& path) {
  const int cell = 8;  // pixels per matrix cell
  int w = static_cast<int>(m.cols()) * cell;
  int hgt = static_cast<int>(m.rows()) * cell;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "P5\n" << w << " " << hgt << "\n255\n";
  for (int y = 0; y < hgt; y++)
    for (int x = 0; x < w; x++) {
      double v = m(y / cell, x / cell);
      int g = std::isnan(v) ? 0 : static_cast<int>(std::lround((v + 1.0) / 2.0 * 255.0));
      out.put(static_cast<char>(std::clamp(g, 0, 255)));
    }
}

int run_train(umt::TrainConfig cfg) {
  umt::Corpus corpus = umt::scan_corpus(cfg.corpus_root, cfg.split_ratio, cfg.seed);
  fs::create_directories(cfg.out_dir);
  umt::write_manifest(corpus, cfg.out_dir + "/manifest.tsv");

  std::ofstream log_file(cfg.out_dir + "/train.log", std::ios::app);
  json echo = config_to_json(cfg);
  echo["event"] = "config";
  echo["ts"] = timestamp();
  log_file << echo.dump() << std::endl;
  std::cout << echo.dump() << std::endl;

  std::signal(SIGINT, sigint_handler);
  auto log = [&](const umt::StepReport& r) {
    json rec{{"ts", timestamp()},   {"step", r.step},
             {"domain", r.domain},  {"recon_ce", r.recon_ce},
             {"confusion_ce", r.confusion_ce}, {"classifier_ce", r.classifier_ce},
             {"lr", r.lr}};
    log_file << rec.dump() << std::endl;
    if (r.step % 10 == 0 || r.step == 1) std::cout << rec.dump() << std::endl;
  };
  std::string ckpt = umt::train_loop(cfg, corpus, log, &g_stop);
  std::cout << "checkpoint: " << ckpt << std::endl;
  return 0;
}

void write_translation_sidecar(const std::string& out_path, const std::string& input,
                               const std::string& ckpt_path, const std::string& domain,
                               uint64_t seed, double temperature) {
  json meta{{"source", input},
            {"target_domain", domain},
            {"seed", seed},
            {"temperature", temperature},
            {"checkpoint", ckpt_path},
            {"checkpoint_hash", umt::file_hash(ckpt_path)}};
  std::ofstream side(out_path + ".json");
  side << meta.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training and sampling churn through many MB-sized temporaries; keep them
  // inside the main arena instead of round-tripping through mmap/munmap.
  mallopt(M_MMAP_THRESHOLD, 128 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"Multi-domain WaveNet autoencoder for music translation"};
  app.require_subcommand(1);

  // --- make-synth-corpus ---
  auto* synth = app.add_subcommand(
      "make-synth-corpus", "Generate the two-domain sine/saw melody corpus");
  std::string synth_out = "synth_corpus";
  uint64_t synth_seed = 0;
  int synth_tracks = 32, synth_notes = 8;
  synth->add_option("--out", synth_out, "Output corpus root")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Melody RNG seed")->capture_default_str();
  synth->add_option("--tracks", synth_tracks, "Tracks per domain")->capture_default_str();
  synth->add_option("--notes", synth_notes, "Notes per track")->capture_default_str();

  // --- train ---
  auto* train = app.add_subcommand("train", "Train the multi-domain autoencoder");
  std::string config_path;
  umt::TrainConfig cfg;
  train->add_option("--config", config_path, "JSON config file (flags override)");
  auto* o_corpus = train->add_option("--corpus", cfg.corpus_root, "Corpus root directory");
  auto* o_out = train->add_option("--out", cfg.out_dir, "Output directory");
  auto* o_preset =
      train->add_option("--preset", cfg.preset, "Model preset: toy, full, tiny")
          ->capture_default_str();
  auto* o_lambda =
      train->add_option("--lambda", cfg.lambda, "Confusion loss weight")
          ->capture_default_str();
  auto* o_lr = train->add_option("--lr", cfg.lr, "ADAM learning rate")->capture_default_str();
  auto* o_decay = train->add_option("--lr-decay", cfg.lr_decay, "Decay factor")
                      ->capture_default_str();
  auto* o_decay_every =
      train->add_option("--decay-every-clips", cfg.decay_every_clips,
                        "Clips between lr decays")->capture_default_str();
  auto* o_batch = train->add_option("--batch-size", cfg.batch_size, "Clips per batch")
                      ->capture_default_str();
  auto* o_clip = train->add_option("--clip-len", cfg.clip_len, "Clip length in seconds")
                     ->capture_default_str();
  auto* o_steps = train->add_option("--max-steps", cfg.max_steps, "Total train steps")
                      ->capture_default_str();
  auto* o_ckpt_every =
      train->add_option("--checkpoint-every", cfg.checkpoint_every,
                        "Steps between checkpoints")->capture_default_str();
  auto* o_disc = train->add_option("--disc-steps", cfg.disc_steps,
                                   "Discriminator updates per step")
                     ->capture_default_str();
  auto* o_seed = train->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  auto* o_split = train->add_option("--split-ratio", cfg.split_ratio,
                                    "Train fraction of tracks")->capture_default_str();
  bool resume_flag = false;
  auto* o_resume = train->add_flag("--resume", resume_flag, "Continue from last.ckpt");

  // --- translate ---
  auto* trans = app.add_subcommand("translate", "Translate audio into a domain");
  std::string t_ckpt, t_input, t_domain, t_out = "translated.wav";
  uint64_t t_seed = 0;
  double t_temp = 1.0;
  trans->add_option("--checkpoint", t_ckpt, "Model checkpoint")->required();
  trans->add_option("--input", t_input, "Input WAV (any domain)")->required();
  trans->add_option("--to", t_domain, "Target domain name")->required();
  trans->add_option("--seed", t_seed, "Sampling seed")->capture_default_str();
  trans->add_option("--temperature", t_temp, "Softmax temperature; <=0 is argmax")
      ->capture_default_str();
  trans->add_option("--out", t_out, "Output WAV path")->capture_default_str();

  // --- blend ---
  auto* blend = app.add_subcommand("blend", "Blend two clips in latent space");
  std::string b_ckpt, b_a, b_b, b_domain, b_out = "blended.wav";
  double b_hold = 3.5, b_fade = 1.5, b_temp = 1.0;
  uint64_t b_seed = 0;
  blend->add_option("--checkpoint", b_ckpt, "Model checkpoint")->required();
  blend->add_option("--a", b_a, "First input WAV")->required();
  blend->add_option("--b", b_b, "Second input WAV")->required();
  blend->add_option("--to", b_domain, "Decoding domain name")->required();
  blend->add_option("--hold", b_hold, "Seconds of pure first latent")
      ->capture_default_str();
  blend->add_option("--fade", b_fade, "Crossfade length in seconds")
      ->capture_default_str();
  blend->add_option("--seed", b_seed, "Sampling seed")->capture_default_str();
  blend->add_option("--temperature", b_temp, "Softmax temperature")->capture_default_str();
  blend->add_option("--out", b_out, "Output WAV path")->capture_default_str();

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "Pitch metrics and embedding similarity");
  std::string e_a, e_b, e_pairs, e_out, e_ckpt, e_notes_a, e_notes_b;
  std::string e_matrix_out = "similarity.txt", e_plot_out = "similarity.pgm";
  ev->add_option("--a", e_a, "First WAV of a single pair");
  ev->add_option("--b", e_b, "Second WAV of a single pair");
  ev->add_option("--pairs", e_pairs, "File of lines: <id> <wav_a> <wav_b>");
  ev->add_option("--out", e_out, "Record output file (default stdout)");
  ev->add_option("--checkpoint", e_ckpt, "Checkpoint for embedding similarity");
  ev->add_option("--notes-a", e_notes_a, "Directory of per-pitch notes, set A");
  ev->add_option("--notes-b", e_notes_b, "Directory of per-pitch notes, set B");
  ev->add_option("--matrix-out", e_matrix_out, "Similarity grid output")
      ->capture_default_str();
  ev->add_option("--plot-out", e_plot_out, "Similarity heatmap image (PGM)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      umt::Corpus c = umt::make_synth_corpus(synth_out, synth_seed, synth_tracks,
                                             synth_notes);
      std::cout << "wrote " << c.tracks.size() << " tracks under " << synth_out
                << std::endl;
      return 0;
    }

    if (train->parsed()) {
      umt::TrainConfig file_cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw umt::ConfigError("cannot read config file: " + config_path);
        config_from_json(json::parse(in), file_cfg);
      }
      // Flags win over the config file.
      if (!o_corpus->count()) cfg.corpus_root = file_cfg.corpus_root;
      if (!o_out->count()) cfg.out_dir = file_cfg.out_dir;
      if (!o_preset->count()) cfg.preset = file_cfg.preset;
      if (!o_lambda->count()) cfg.lambda = file_cfg.lambda;
      if (!o_lr->count()) cfg.lr = file_cfg.lr;
      if (!o_decay->count()) cfg.lr_decay = file_cfg.lr_decay;
      if (!o_decay_every->count()) cfg.decay_every_clips = file_cfg.decay_every_clips;
      if (!o_batch->count()) cfg.batch_size = file_cfg.batch_size;
      if (!o_clip->count()) cfg.clip_len = file_cfg.clip_len;
      if (!o_steps->count()) cfg.max_steps = file_cfg.max_steps;
      if (!o_ckpt_every->count()) cfg.checkpoint_every = file_cfg.checkpoint_every;
      if (!o_disc->count()) cfg.disc_steps = file_cfg.disc_steps;
      if (!o_seed->count()) cfg.seed = file_cfg.seed;
      if (!o_split->count()) cfg.split_ratio = file_cfg.split_ratio;
      cfg.resume = o_resume->count() ? resume_flag : file_cfg.resume;
      if (cfg.corpus_root.empty()) throw umt::ConfigError("no corpus root configured");
      if (cfg.out_dir.empty()) throw umt::ConfigError("no output directory configured");
      return run_train(cfg);
    }

    if (trans->parsed()) {
      umt::Checkpoint ck = umt::load_checkpoint(t_ckpt);
      int domain = umt::domain_index(ck.domains, t_domain);
      umt::AudioSegment input = umt::load_wav(t_input, ck.model.h.sample_rate);
      umt::TranslationResult res = umt::translate(ck.model, input, domain, t_seed, t_temp);
      umt::save_wav(res.output, t_out);
      write_translation_sidecar(t_out, t_input, t_ckpt, t_domain, t_seed, t_temp);
      std::cout << "wrote " << t_out << " (" << res.output.duration_s() << " s)"
                << std::endl;
      return 0;
    }

    if (blend->parsed()) {
      umt::Checkpoint ck = umt::load_checkpoint(b_ckpt);
      int domain = umt::domain_index(ck.domains, b_domain);
      const auto& model = ck.model;
      umt::Matf ei = umt::encode_audio(model, umt::load_wav(b_a, model.h.sample_rate));
      umt::Matf ej = umt::encode_audio(model, umt::load_wav(b_b, model.h.sample_rate));
      umt::Matf z = umt::blend_latents(ei, ej, b_hold, b_fade,
                                       model.h.frames_per_second());
      umt::Rng rng(b_seed);
      auto indices =
          umt::generate_fast(model.dec[domain], model.h, z,
                             static_cast<int>(z.cols()) * model.h.pool_kernel, rng, b_temp);
      umt::AudioSegment out;
      out.sample_rate = model.h.sample_rate;
      out.samples = umt::mu_law_decode(indices);
      umt::save_wav(out, b_out);
      write_translation_sidecar(b_out, b_a + "+" + b_b, b_ckpt, b_domain, b_seed, b_temp);
      std::cout << "wrote " << b_out << std::endl;
      return 0;
    }

    if (ev->parsed()) {
      std::ofstream out_file;
      std::ostream* records = &std::cout;
      if (!e_out.empty()) {
        out_file.open(e_out);
        if (!out_file) throw std::runtime_error("cannot write " + e_out);
        records = &out_file;
      }
      auto emit_pair = [&](const std::string& id, const std::string& pa,
                           const std::string& pb) {
        umt::PitchTrack ta = umt::track_pitch(umt::load_wav(pa));
        umt::PitchTrack tb = umt::track_pitch(umt::load_wav(pb));
        *records << id << "\t" << umt::pitch_ncc(ta, tb) << "\t"
                 << umt::pitch_dtw_corr(ta, tb) << "\t" << umt::voiced_overlap(ta, tb)
                 << "\n";
      };
      bool did_anything = false;
      if (!e_a.empty() && !e_b.empty()) {
        emit_pair("pair0", e_a, e_b);
        did_anything = true;
      }
      if (!e_pairs.empty()) {
        std::ifstream in(e_pairs);
        if (!in) throw umt::ConfigError("cannot read pairs file: " + e_pairs);
        std::string id, pa, pb;
        while (in >> id >> pa >> pb) emit_pair(id, pa, pb);
        did_anything = true;
      }
      if (!e_ckpt.empty() && !e_notes_a.empty() && !e_notes_b.empty()) {
        umt::Checkpoint ck = umt::load_checkpoint(e_ckpt);
        auto load_dir = [&](const std::string& dir) {
          std::vector<std::string> files;
          for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".wav") files.push_back(e.path().string());
          std::sort(files.begin(), files.end());
          std::vector<umt::AudioSegment> notes;
          for (const auto& f : files)
            notes.push_back(umt::load_wav(f, ck.model.h.sample_rate));
          return notes;
        };
        Eigen::MatrixXd m = umt::embedding_similarity_matrix(
            ck.model, load_dir(e_notes_a), load_dir(e_notes_b));
        std::ofstream grid(e_matrix_out);
        grid << m << "\n";
        write_pgm_heatmap(m, e_plot_out);
        std::cout << "diagonal row-max fraction: " << umt::diagonal_rowmax_fraction(m)
                  << std::endl;
        did_anything = true;
      }
      if (!did_anything)
        throw umt::ConfigError(
            "eval: give --a/--b, --pairs, or --checkpoint with --notes-a/--notes-b");
      return 0;
    }
  } catch (const umt::ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 0;
}
