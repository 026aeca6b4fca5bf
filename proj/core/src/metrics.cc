// umt/metrics.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/metrics.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "umt/infer.h"

namespace umt {
namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); i++) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0, rx = 0, ry = 0;
  for (size_t i = 0; i < x.size(); i++) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    rx = std::max(rx, std::abs(x[i] - mx));
    ry = std::max(ry, std::abs(y[i] - my));
  }
  // Flatness via max deviation: summed variance of a constant sequence can
  // come out as rounding fuzz instead of exactly zero.
  if (rx < 1e-9 || ry < 1e-9) {
    // Flat sequences: correlated if they coincide, undefined otherwise.
    double dist = 0;
    for (size_t i = 0; i < x.size(); i++) dist = std::max(dist, std::abs(x[i] - y[i]));
    if (dist < 1e-9) return 1.0;
    throw std::runtime_error("pitch correlation undefined: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double pitch_ncc(const PitchTrack& a, const PitchTrack& b, double max_shift_s) {
  const int max_shift = static_cast<int>(std::lround(max_shift_s * a.frame_rate));
  const auto na = static_cast<int>(a.frames());
  const auto nb = static_cast<int>(b.frames());
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int shift = -max_shift; shift <= max_shift; shift++) {
    std::vector<double> xs, ys;
    for (int i = 0; i < na; i++) {
      int j = i + shift;
      if (j < 0 || j >= nb) continue;
      if (!a.voiced[i] || !b.voiced[j]) continue;
      xs.push_back(std::log(a.f0[i]));
      ys.push_back(std::log(b.f0[j]));
    }
    if (xs.size() < 2) continue;
    try {
      best = std::max(best, pearson(xs, ys));
      any = true;
    } catch (const std::runtime_error&) {
      // zero-variance at this shift; other shifts may still be defined
    }
  }
  if (!any)
    throw std::runtime_error(
        "pitch_ncc undefined: fewer than two jointly voiced frames at every shift");
  return best;
}

double pitch_dtw_corr(const PitchTrack& a, const PitchTrack& b) {
  // Align the full timelines, not just the voiced subsequences: dropping
  // unvoiced frames would splice distant notes together whenever the two
  // tracks go silent at different moments, and the alignment would then
  // compare unrelated notes. Voicing disagreements pay a fixed penalty
  // (half an octave in log-f0) instead.
  const auto na = static_cast<int>(a.frames());
  const auto nb = static_cast<int>(b.frames());
  if (na < 2 || nb < 2)
    throw std::runtime_error("pitch_dtw_corr undefined: fewer than two frames");
  constexpr double kVoicingPenalty = 0.5 * 0.6931471805599453;  // ln(2)/2

  auto cost = [&](int i, int j) {
    if (a.voiced[i] && b.voiced[j]) return std::abs(std::log(a.f0[i]) - std::log(b.f0[j]));
    if (!a.voiced[i] && !b.voiced[j]) return 0.0;
    return kVoicingPenalty;
  };

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc(na + 1, nb + 1);
  acc.setConstant(inf);
  acc(0, 0) = 0;
  for (int i = 1; i <= na; i++)
    for (int j = 1; j <= nb; j++)
      acc(i, j) = cost(i - 1, j - 1) +
                  std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});

  // Correlate the jointly voiced aligned pairs along the optimal path.
  std::vector<double> px, py;
  int i = na, j = nb;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a.voiced[i - 1] && b.voiced[j - 1]) {
      px.push_back(std::log(a.f0[i - 1]));
      py.push_back(std::log(b.f0[j - 1]));
    }
    if (i == 0) { j--; continue; }
    if (j == 0) { i--; continue; }
    double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
    if (diag <= up && diag <= left) { i--; j--; }
    else if (up <= left) i--;
    else j--;
  }
  if (px.size() < 2)
    throw std::runtime_error(
        "pitch_dtw_corr undefined: fewer than two jointly voiced aligned frames");
  return pearson(px, py);
}

double voiced_overlap(const PitchTrack& a, const PitchTrack& b) {
  size_t n = std::min(a.frames(), b.frames());
  if (n == 0) return 0;
  size_t both = 0;
  for (size_t i = 0; i < n; i++)
    if (a.voiced[i] && b.voiced[i]) both++;
  return static_cast<double>(both) / n;
}

Eigen::MatrixXd embedding_similarity_matrix(const Model<float>& model,
                                            const std::vector<AudioSegment>& notes_a,
                                            const std::vector<AudioSegment>& notes_b) {
  if (notes_a.size() != notes_b.size())
    throw std::invalid_argument("similarity matrix: note sets must cover the same pitches");
  auto embed = [&](const AudioSegment& s) -> Eigen::VectorXd {
    Matf z = encode_audio(model, s);
    return z.rowwise().mean().cast<double>();
  };
  std::vector<Eigen::VectorXd> ea, eb;
  for (const auto& s : notes_a) ea.push_back(embed(s));
  for (const auto& s : notes_b) eb.push_back(embed(s));

  const auto n = static_cast<Eigen::Index>(notes_a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index p = 0; p < n; p++)
    for (Eigen::Index q = 0; q < n; q++) {
      double na = ea[p].norm(), nb = eb[q].norm();
      m(p, q) = (na > 0 && nb > 0) ? ea[p].dot(eb[q]) / (na * nb)
                                   : std::numeric_limits<double>::quiet_NaN();
    }
  return m;
}

double diagonal_rowmax_fraction(const Eigen::MatrixXd& m) {
  int hits = 0;
  for (Eigen::Index i = 0; i < m.rows(); i++) {
    Eigen::Index best = 0;
    m.row(i).maxCoeff(&best);
    if (best == i) hits++;
  }
  return static_cast<double>(hits) / m.rows();
}

}  // namespace umt
