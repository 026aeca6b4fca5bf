// umt/data.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_DATA_H_
#define UMT_DATA_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "umt/audio.h"
#include "umt/common.h"

namespace umt {

struct TrackInfo {
  std::string path;
  int domain = 0;
  double duration_s = 0;
  uint64_t hash = 0;
  bool test = false;
};

/// Corpus layout on disk: root/<domain_name>/*.wav. Track-level train/test
/// split, deterministic given (file hashes, seed).
struct Corpus {
  std::string root;
  std::vector<std::string> domain_names;
  std::vector<TrackInfo> tracks;
  std::vector<std::string> skipped;  // unreadable files, recorded in manifest

  std::vector<int> train_tracks(int domain) const;
  std::vector<int> test_tracks(int domain) const;
};

Corpus scan_corpus(const std::string& root, double split_ratio, uint64_t seed);
void write_manifest(const Corpus& corpus, const std::string& path);

struct ClipSample {
  int domain = 0;
  int track = 0;
  long offset = 0;  // samples
  AudioSegment clip;
};

struct AuditEntry {
  int domain, track;
  long offset;
};

/// Draws fixed-length clips from the train split, tracks weighted by
/// duration. Decoded tracks are cached; every draw is recorded.
class ClipSampler {
 public:
  ClipSampler(const Corpus& corpus, int sample_rate = kDefaultSampleRate);

  std::vector<ClipSample> sample_batch(int domain, int n, double clip_len, Rng& rng);
  const std::vector<AuditEntry>& audit_log() const { return audit_; }

  /// Re-extracts the clip a log entry describes (audit replay).
  AudioSegment replay(const AuditEntry& e, double clip_len);

 private:
  const AudioSegment& track_audio(int track);

  const Corpus& corpus_;
  int sample_rate_;
  std::map<int, AudioSegment> cache_;
  std::vector<AuditEntry> audit_;
};

/// Two-domain synthetic corpus: monophonic random 8-note melodies
/// (MIDI 48-72, 0.25 s per note, ADSR envelope), rendered once as pure
/// sines and once as band-limited sawtooths over the same melodies.
/// Ground-truth note sequences are written next to each WAV as
/// "<onset_s> <midi> <dur_s>" lines.
Corpus make_synth_corpus(const std::string& out_root, uint64_t seed,
                         int tracks_per_domain = 32, int notes_per_track = 8);

/// One enveloped note; timbre is "sine" or "saw" (8 harmonics).
AudioSegment synth_note(const std::string& timbre, int midi, double dur_s,
                        int sample_rate = kDefaultSampleRate);

double midi_to_hz(int midi);

}  // namespace umt

#endif  // UMT_DATA_H_
