// umt/metrics.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef UMT_METRICS_H_
#define UMT_METRICS_H_

#include <Eigen/Dense>
#include <vector>

#include "umt/audio.h"
#include "umt/nets.h"
#include "umt/pitch.h"

namespace umt {

/// Pearson correlation of log-f0 over jointly voiced frames, maximized over
/// integer frame shifts up to max_shift_s. Throws if no shift has at least
/// two jointly voiced frames.
double pitch_ncc(const PitchTrack& a, const PitchTrack& b, double max_shift_s = 0.5);

/// Dynamic-time-warping alignment of the voiced log-f0 sequences (diagonal /
/// insert / delete steps, |log f0_a - log f0_b| local cost), then Pearson
/// correlation of the aligned pairs.
double pitch_dtw_corr(const PitchTrack& a, const PitchTrack& b);

/// Fraction of frames voiced in both tracks at zero shift (reported by the
/// eval records).
double voiced_overlap(const PitchTrack& a, const PitchTrack& b);

/// Time-mean 64-dim embedding per note; matrix[p][q] is the cosine of
/// emb_a[p] and emb_b[q]. A zero-norm embedding yields NaN cells.
Eigen::MatrixXd embedding_similarity_matrix(const Model<float>& model,
                                            const std::vector<AudioSegment>& notes_a,
                                            const std::vector<AudioSegment>& notes_b);

/// Fraction of rows whose maximum sits on the diagonal.
double diagonal_rowmax_fraction(const Eigen::MatrixXd& m);

}  // namespace umt

#endif  // UMT_METRICS_H_
