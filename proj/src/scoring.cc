// src/scoring.cc

// Copyright 2026  The jplda Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "jplda/scoring.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "jplda/errors.h"
#include "jplda/posterior.h"

namespace jplda {

namespace {

void CheckDim(const Vector &v, int dim, const char *what) {
  if (v.size() != dim)
    throw InputError(std::string(what) + " vector has dimension " +
                     std::to_string(v.size()) + ", model expects " +
                     std::to_string(dim));
}

// log((p1 e^q1 + p2 e^q2) / (p1 + p2)). Zero-prior terms drop out, so
// their Q may be anything, and equal Q values come back unchanged.
double LogMixture(double p1, double q1, double p2, double q2) {
  if (p1 <= 0.0) return q2;
  if (p2 <= 0.0) return q1;
  const double hi = std::max(q1, q2);
  return hi + std::log(p1 * std::exp(q1 - hi) + p2 * std::exp(q2 - hi)) -
         std::log(p1 + p2);
}

// Q of the channel posterior for `table` (already centered) under a
// zero-mean copy of the model.
double ChannelQ(const ModelParams &centered_params, const EmbeddingTable &table) {
  const PrecisionCache cache = BuildPrecisions(centered_params, table);
  const InnerPosterior inner =
      ComputeInnerPosterior(centered_params, cache, table);
  return 0.5 * inner.log_det_sigma + 0.5 * inner.x_hat.dot(inner.phi);
}

}  // namespace

TrialScorer::TrialScorer(const ModelParams &params,
                         const HypothesisPriors &priors)
    : params_(params), priors_(priors) {
  params_.Validate();
  priors_.Validate();
  const Matrix &v = params_.speaker_loadings;
  const Matrix &u = params_.channel_loadings;
  const int rx = params_.ChannelRank();
  const int ry = params_.SpeakerRank();
  u_t_d_ = u.transpose() * params_.precision.asDiagonal();
  v_t_d_ = v.transpose() * params_.precision.asDiagonal();
  const Matrix j = u_t_d_ * v;
  const Matrix vdv = v_t_d_ * v;
  const Matrix udu = u_t_d_ * u;
  const Matrix eye_x = Matrix::Identity(rx, rx);
  const Matrix eye_y = Matrix::Identity(ry, ry);

  l_same_ = FactorOrThrow(2.0 * vdv + eye_y, "speaker precision L_S");
  l_diff_ = FactorOrThrow(vdv + eye_y, "speaker precision L_D");
  log_det_l_same_ = LogDet(l_same_);
  log_det_l_diff_ = LogDet(l_diff_);
  j_l_same_ = l_same_.solve(j.transpose()).transpose();
  j_l_diff_ = l_diff_.solve(j.transpose()).transpose();

  Matrix a_same = j_l_same_ * j.transpose();
  a_same = 0.5 * (a_same + a_same.transpose()).eval();
  Matrix a_diff = j_l_diff_ * j.transpose();
  a_diff = 0.5 * (a_diff + a_diff.transpose()).eval();
  const Matrix k_same = 2.0 * udu + eye_x;  // one channel, two samples
  const Matrix k_diff = udu + eye_x;        // one channel, one sample

  auto make = [](const Matrix &precision, const char *what) {
    ChannelHypothesis h;
    h.precision = FactorOrThrow(precision, what);
    h.log_det_sigma = -LogDet(h.precision);
    return h;
  };
  sc_ss_ = make(k_same - 4.0 * a_same, "channel posterior precision (SC,SS)");
  sc_ds_ = make(k_same - 2.0 * a_diff, "channel posterior precision (SC,DS)");

  Matrix dc_ss(2 * rx, 2 * rx);
  dc_ss << k_diff - a_same, -a_same, -a_same, k_diff - a_same;
  dc_ss_ = make(dc_ss, "channel posterior precision (DC,SS)");
  Matrix dc_ds = Matrix::Zero(2 * rx, 2 * rx);
  dc_ds.topLeftCorner(rx, rx) = k_diff - a_diff;
  dc_ds.bottomRightCorner(rx, rx) = k_diff - a_diff;
  dc_ds_ = make(dc_ds, "channel posterior precision (DC,DS)");
}

TrialScore TrialScorer::Score(const Vector &enroll, const Vector &test) const {
  const int d = params_.Dim();
  CheckDim(enroll, d, "enrollment");
  CheckDim(test, d, "test");
  const int rx = params_.ChannelRank();

  const Vector e = enroll - params_.mean;
  const Vector t = test - params_.mean;
  const Vector ve = v_t_d_ * e, vt = v_t_d_ * t;
  const Vector ue = u_t_d_ * e, ut = u_t_d_ * t;

  TrialScore score;
  const Vector ls_ve = l_same_.solve(ve), ls_vt = l_same_.solve(vt);
  const Vector ld_ve = l_diff_.solve(ve), ld_vt = l_diff_.solve(vt);
  score.llr_outer = log_det_l_diff_ - 0.5 * log_det_l_same_ +
                    0.5 * ve.dot(ls_ve - ld_ve) + 0.5 * vt.dot(ls_vt - ld_vt) +
                    vt.dot(ls_ve);

  const Vector sum_v = ve + vt;
  const Vector sum_u = ue + ut;
  const Vector shift_same = j_l_same_ * sum_v;

  score.q_sc_ss = sc_ss_.Q(sum_u - 2.0 * shift_same);
  score.q_sc_ds = sc_ds_.Q(sum_u - j_l_diff_ * sum_v);

  Vector phi(2 * rx);
  phi << ue - shift_same, ut - shift_same;
  score.q_dc_ss = dc_ss_.Q(phi);
  phi << ue - j_l_diff_ * ve, ut - j_l_diff_ * vt;
  score.q_dc_ds = dc_ds_.Q(phi);

  const double numerator =
      LogMixture(priors_.same_channel_same_speaker, score.q_sc_ss,
                 priors_.diff_channel_same_speaker, score.q_dc_ss);
  const double denominator =
      LogMixture(priors_.same_channel_diff_speaker, score.q_sc_ds,
                 priors_.diff_channel_diff_speaker, score.q_dc_ds);
  score.llr_inner = numerator - denominator;
  score.llr = score.llr_outer + score.llr_inner;
  return score;
}

TrialScore ScoreTrial(const ModelParams &params,
                      const HypothesisPriors &priors, const Vector &enroll,
                      const Vector &test) {
  return TrialScorer(params, priors).Score(enroll, test);
}

TrialScore ScoreUnseenChannel(const ModelParams &params,
                              std::span<const EnrollmentSample> enrollment,
                              const Vector &test) {
  params.Validate();
  if (enrollment.empty()) throw InputError("enrollment set is empty");
  const int d = params.Dim();
  CheckDim(test, d, "test");
  const int n_e = static_cast<int>(enrollment.size());

  // Enrollment samples first, then the test sample in its own channel.
  Matrix samples(d, n_e + 1);
  std::vector<int> channels;
  std::unordered_map<int, int> remap;
  for (int i = 0; i < n_e; ++i) {
    CheckDim(enrollment[i].features, d, "enrollment");
    samples.col(i) = enrollment[i].features - params.mean;
    auto [it, inserted] =
        remap.try_emplace(enrollment[i].channel, static_cast<int>(remap.size()));
    channels.push_back(it->second);
  }
  const int num_channels = static_cast<int>(remap.size());
  samples.col(n_e) = test - params.mean;
  channels.push_back(num_channels);

  ModelParams centered = params;
  centered.mean = Vector::Zero(d);

  TrialScore score;
  std::vector<int> same(n_e + 1, 0);
  std::vector<int> diff(n_e + 1, 0);
  diff.back() = 1;
  score.q_ss = ChannelQ(centered, EmbeddingTable::FromLabels(samples, same, channels));
  score.q_ds = ChannelQ(centered, EmbeddingTable::FromLabels(samples, diff, channels));
  score.llr_inner = score.q_ss - score.q_ds;

  const Matrix vdv = params.speaker_loadings.transpose() *
                     params.precision.asDiagonal() * params.speaker_loadings;
  const Matrix eye = Matrix::Identity(vdv.rows(), vdv.cols());
  const Cholesky l_same =
      FactorOrThrow((n_e + 1.0) * vdv + eye, "speaker precision L_S");
  const Cholesky l_enroll = FactorOrThrow(n_e * vdv + eye, "speaker precision L_D");
  const Cholesky l_test = FactorOrThrow(vdv + eye, "speaker precision L");

  const Matrix v_t_d =
      params.speaker_loadings.transpose() * params.precision.asDiagonal();
  const Vector f = v_t_d * samples.leftCols(n_e).rowwise().sum();
  const Vector m = v_t_d * samples.col(n_e);
  const Vector ls_f = l_same.solve(f), ls_m = l_same.solve(m);
  score.llr_outer = 0.5 * LogDet(l_enroll) + 0.5 * LogDet(l_test) -
                    0.5 * LogDet(l_same) +
                    0.5 * f.dot(ls_f - l_enroll.solve(f)) +
                    0.5 * m.dot(ls_m - l_test.solve(m)) + m.dot(ls_f);
  score.llr = score.llr_outer + score.llr_inner;
  return score;
}

std::vector<TrialScore> ScoreTrialList(const ModelParams &params,
                                       const HypothesisPriors &priors,
                                       const EmbeddingTable &enroll_table,
                                       const EmbeddingTable &test_table,
                                       std::span<const Trial> trials) {
  auto index_of = [](const EmbeddingTable &table) {
    std::unordered_map<std::string, int> index;
    for (int i = 0; i < table.NumSamples(); ++i)
      index.emplace(table.SampleIds()[i], i);
    return index;
  };
  const auto enroll_index = index_of(enroll_table);
  const auto test_index = index_of(test_table);

  std::vector<TrialScore> scores;
  if (trials.empty()) return scores;
  const TrialScorer scorer(params, priors);
  scores.reserve(trials.size());
  for (size_t k = 0; k < trials.size(); ++k) {
    const Trial &trial = trials[k];
    const int line = trial.line > 0 ? trial.line : static_cast<int>(k) + 1;
    auto e = enroll_index.find(trial.enroll_id);
    if (e == enroll_index.end())
      throw InputError("unknown enrollment id '" + trial.enroll_id +
                       "' at line " + std::to_string(line));
    auto t = test_index.find(trial.test_id);
    if (t == test_index.end())
      throw InputError("unknown test id '" + trial.test_id + "' at line " +
                       std::to_string(line));
    scores.push_back(scorer.Score(enroll_table.Sample(e->second),
                                  test_table.Sample(t->second)));
  }
  return scores;
}

double ComputeEer(std::span<const double> target_scores,
                  std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty())
    throw InputError("EER needs at least one target and one nontarget score");

  std::vector<std::pair<double, bool>> all;
  all.reserve(target_scores.size() + nontarget_scores.size());
  for (double s : target_scores) all.emplace_back(s, true);
  for (double s : nontarget_scores) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });

  // Operating points (false alarm, miss) as the threshold sweeps upward
  // through each distinct score.
  const double nt = static_cast<double>(target_scores.size());
  const double nn = static_cast<double>(nontarget_scores.size());
  std::vector<std::pair<double, double>> roc{{1.0, 0.0}};
  size_t misses = 0, rejections = 0;
  for (size_t i = 0; i < all.size();) {
    const double value = all[i].first;
    for (; i < all.size() && all[i].first == value; ++i)
      all[i].second ? ++misses : ++rejections;
    roc.emplace_back(1.0 - rejections / nn, misses / nt);
  }

  // Lower convex hull, scanned by increasing false-alarm rate.
  std::sort(roc.begin(), roc.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto &p : roc) {
    while (hull.size() >= 2) {
      const auto &a = hull[hull.size() - 2];
      const auto &b = hull.back();
      const double cross = (b.first - a.first) * (p.second - a.second) -
                           (b.second - a.second) * (p.first - a.first);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }

  for (size_t k = 0; k + 1 < hull.size(); ++k) {
    const double g1 = hull[k].second - hull[k].first;
    const double g2 = hull[k + 1].second - hull[k + 1].first;
    if (g1 >= 0.0 && g2 <= 0.0) {
      if (g1 == g2) return hull[k].first;
      const double w = g1 / (g1 - g2);
      return hull[k].first + w * (hull[k + 1].first - hull[k].first);
    }
  }
  return hull.back().first;  // not reached: hull runs from g >= 0 to g = -1
}

}  // namespace jplda
