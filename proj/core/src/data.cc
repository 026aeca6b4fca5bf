// umt/data.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/data.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "umt/checkpoint.h"
#include "umt/wav.h"

namespace umt {

namespace fs = std::filesystem;

std::vector<int> Corpus::train_tracks(int domain) const {
  std::vector<int> out;
  for (size_t i = 0; i < tracks.size(); i++)
    if (tracks[i].domain == domain && !tracks[i].test) out.push_back(int(i));
  return out;
}

std::vector<int> Corpus::test_tracks(int domain) const {
  std::vector<int> out;
  for (size_t i = 0; i < tracks.size(); i++)
    if (tracks[i].domain == domain && tracks[i].test) out.push_back(int(i));
  return out;
}

Corpus scan_corpus(const std::string& root, double split_ratio, uint64_t seed) {
  if (!fs::is_directory(root))
    throw ConfigError("corpus root is not a directory: " + root);

  Corpus corpus;
  corpus.root = root;
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path().filename().string());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw ConfigError("corpus has no domain directories: " + root);

  for (const auto& dir : dirs) {
    int domain = static_cast<int>(corpus.domain_names.size());
    corpus.domain_names.push_back(dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(fs::path(root) / dir))
      if (e.is_regular_file() && e.path().extension() == ".wav")
        files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    size_t readable = 0;
    for (const auto& f : files) {
      TrackInfo t;
      t.path = f;
      t.domain = domain;
      try {
        t.duration_s = wav_duration_s(f);
        t.hash = file_hash(f);
      } catch (const std::exception& ex) {
        std::cerr << "warning: skipping unreadable track " << f << ": " << ex.what()
                  << "\n";
        corpus.skipped.push_back(f + " (" + ex.what() + ")");
        continue;
      }
      corpus.tracks.push_back(std::move(t));
      readable++;
    }
    if (readable == 0)
      throw ConfigError("domain '" + dir + "' has no readable WAV tracks");
  }

  // Per-domain split, keyed by file hash so re-scans keep assignments stable.
  for (size_t d = 0; d < corpus.domain_names.size(); d++) {
    std::vector<std::pair<uint64_t, size_t>> keyed;
    for (size_t i = 0; i < corpus.tracks.size(); i++) {
      if (corpus.tracks[i].domain != int(d)) continue;
      uint64_t key = fnv1a(&corpus.tracks[i].hash, sizeof(uint64_t), seed * 0x9e3779b97f4a7c15ull + 0xcbf29ce484222325ull);
      keyed.emplace_back(key, i);
    }
    auto n_test = static_cast<size_t>(std::lround((1.0 - split_ratio) * keyed.size()));
    n_test = std::min(n_test, keyed.size() - 1);  // train split never empty
    std::sort(keyed.begin(), keyed.end());
    for (size_t k = 0; k < n_test; k++) corpus.tracks[keyed[k].second].test = true;
  }
  return corpus;
}

void write_manifest(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  for (const auto& t : corpus.tracks) {
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(t.hash));
    out << t.path << "\t" << corpus.domain_names[t.domain] << "\t" << t.duration_s
        << "\t" << hash_hex << "\t" << (t.test ? "test" : "train") << "\n";
  }
  for (const auto& s : corpus.skipped) out << "# skipped\t" << s << "\n";
}

ClipSampler::ClipSampler(const Corpus& corpus, int sample_rate)
    : corpus_(corpus), sample_rate_(sample_rate) {}

const AudioSegment& ClipSampler::track_audio(int track) {
  auto it = cache_.find(track);
  if (it == cache_.end())
    it = cache_.emplace(track, load_wav(corpus_.tracks[track].path, sample_rate_)).first;
  return it->second;
}

std::vector<ClipSample> ClipSampler::sample_batch(int domain, int n, double clip_len,
                                                  Rng& rng) {
  auto tracks = corpus_.train_tracks(domain);
  auto clip_samples = static_cast<long>(std::lround(clip_len * sample_rate_));
  std::vector<double> cum;
  double total = 0;
  std::vector<int> usable;
  for (int t : tracks) {
    if (corpus_.tracks[t].duration_s < clip_len) continue;
    usable.push_back(t);
    total += corpus_.tracks[t].duration_s;
    cum.push_back(total);
  }
  if (usable.empty())
    throw ConfigError("domain '" + corpus_.domain_names[domain] +
                      "' has no train track of at least " + std::to_string(clip_len) +
                      " s");

  std::vector<ClipSample> batch;
  for (int i = 0; i < n; i++) {
    double u = rng.uniform(0.0, total);
    size_t idx = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    idx = std::min(idx, usable.size() - 1);
    int track = usable[idx];
    const AudioSegment& audio = track_audio(track);
    long max_off = static_cast<long>(audio.size()) - clip_samples;
    long offset = max_off > 0 ? static_cast<long>(rng.uniform_int(max_off + 1)) : 0;
    ClipSample c;
    c.domain = domain;
    c.track = track;
    c.offset = offset;
    c.clip.sample_rate = sample_rate_;
    c.clip.samples.assign(audio.samples.begin() + offset,
                          audio.samples.begin() + offset + clip_samples);
    audit_.push_back({domain, track, offset});
    batch.push_back(std::move(c));
  }
  return batch;
}

AudioSegment ClipSampler::replay(const AuditEntry& e, double clip_len) {
  const AudioSegment& audio = track_audio(e.track);
  auto clip_samples = static_cast<long>(std::lround(clip_len * sample_rate_));
  AudioSegment clip;
  clip.sample_rate = sample_rate_;
  clip.samples.assign(audio.samples.begin() + e.offset,
                      audio.samples.begin() + e.offset + clip_samples);
  return clip;
}

double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

namespace {

void apply_adsr(std::vector<float>& x, int sr) {
  const auto n = static_cast<ptrdiff_t>(x.size());
  auto attack = static_cast<ptrdiff_t>(0.010 * sr);
  auto decay = static_cast<ptrdiff_t>(0.040 * sr);
  auto release = static_cast<ptrdiff_t>(0.030 * sr);
  const double sustain = 0.75;
  for (ptrdiff_t i = 0; i < n; i++) {
    double env;
    if (i < attack)
      env = static_cast<double>(i) / attack;
    else if (i < attack + decay)
      env = 1.0 - (1.0 - sustain) * (i - attack) / decay;
    else
      env = sustain;
    if (n - 1 - i < release) env *= static_cast<double>(n - i) / release;
    x[i] = static_cast<float>(x[i] * env);
  }
}

}  // namespace

AudioSegment synth_note(const std::string& timbre, int midi, double dur_s,
                        int sample_rate) {
  double f0 = midi_to_hz(midi);
  auto n = static_cast<size_t>(std::lround(dur_s * sample_rate));
  std::vector<float> x(n, 0.0f);
  int harmonics = timbre == "saw" ? 8 : 1;
  if (timbre != "sine" && timbre != "saw")
    throw std::invalid_argument("unknown timbre: " + timbre);
  double peak = 0;
  for (size_t i = 0; i < n; i++) {
    double t = static_cast<double>(i) / sample_rate;
    double v = 0;
    for (int h = 1; h <= harmonics; h++) {
      if (h * f0 >= sample_rate / 2.0) break;  // band limit
      v += std::sin(2.0 * M_PI * h * f0 * t) / h;
    }
    x[i] = static_cast<float>(v);
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0)
    for (auto& s : x) s = static_cast<float>(s * 0.4 / peak);
  apply_adsr(x, sample_rate);
  AudioSegment seg;
  seg.sample_rate = sample_rate;
  seg.samples = std::move(x);
  return seg;
}

Corpus make_synth_corpus(const std::string& out_root, uint64_t seed,
                         int tracks_per_domain, int notes_per_track) {
  const int sr = kDefaultSampleRate;
  const double note_dur = 0.25;
  fs::create_directories(fs::path(out_root) / "sine");
  fs::create_directories(fs::path(out_root) / "saw");

  // One melody stream shared by both timbres: matched indices carry the same
  // notes, used only by evaluation, never paired inside the training loss.
  Rng melody_rng(seed);
  for (int tr = 0; tr < tracks_per_domain; tr++) {
    std::vector<int> notes(notes_per_track);
    for (auto& m : notes) m = 48 + static_cast<int>(melody_rng.uniform_int(25));

    for (const std::string timbre : {"sine", "saw"}) {
      AudioSegment track;
      track.sample_rate = sr;
      for (int m : notes) {
        AudioSegment note = synth_note(timbre, m, note_dur, sr);
        track.samples.insert(track.samples.end(), note.samples.begin(),
                             note.samples.end());
      }
      char name[32];
      std::snprintf(name, sizeof(name), "track%04d", tr);
      fs::path base = fs::path(out_root) / timbre / name;
      save_wav(track, base.string() + ".wav");
      std::ofstream gt(base.string() + ".txt");
      for (int i = 0; i < notes_per_track; i++)
        gt << i * note_dur << " " << notes[i] << " " << note_dur << "\n";
    }
  }
  Corpus corpus = scan_corpus(out_root, 0.8, seed);
  write_manifest(corpus, (fs::path(out_root) / "manifest.tsv").string());
  return corpus;
}

}  // namespace umt
