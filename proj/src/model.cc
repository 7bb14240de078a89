// src/model.cc

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

#include "jplda/model.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "jplda/errors.h"

namespace jplda {

void ModelParams::Validate() const {
  const Eigen::Index d = mean.size();
  if (d < 1) throw std::invalid_argument("model dimension must be >= 1");
  if (speaker_loadings.rows() != d || channel_loadings.rows() != d ||
      precision.size() != d)
    throw std::invalid_argument("model parameter shapes are inconsistent");
  if (speaker_loadings.cols() < 1 || speaker_loadings.cols() > d)
    throw std::invalid_argument("speaker rank must be in [1, d]");
  if (channel_loadings.cols() < 1 || channel_loadings.cols() > d)
    throw std::invalid_argument("channel rank must be in [1, d]");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(precision(i) > 0.0) || !std::isfinite(precision(i)))
      throw std::invalid_argument("precision entry " + std::to_string(i) +
                                  " is not strictly positive");
  }
}

void HypothesisPriors::Validate(double tol) const {
  for (double p : {same_channel_same_speaker, diff_channel_same_speaker,
                   same_channel_diff_speaker, diff_channel_diff_speaker}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("hypothesis prior outside [0, 1]");
  }
  if (std::abs(same_channel_same_speaker + diff_channel_same_speaker - 1.0) >
          tol ||
      std::abs(same_channel_diff_speaker + diff_channel_diff_speaker - 1.0) >
          tol)
    throw std::invalid_argument(
        "channel priors must sum to one under each speaker hypothesis");
}

PrecisionCache::PrecisionCache(const ModelParams &params,
                               std::span<const int> speaker_counts,
                               std::span<const int> channel_counts) {
  params.Validate();
  const Matrix &v = params.speaker_loadings;
  const Matrix &u = params.channel_loadings;
  u_t_d_ = u.transpose() * params.precision.asDiagonal();
  v_t_d_ = v.transpose() * params.precision.asDiagonal();
  coupling_ = u_t_d_ * v;
  u_t_d_u_ = u_t_d_ * u;
  v_t_d_v_ = v_t_d_ * v;

  const Matrix eye_x = Matrix::Identity(u.cols(), u.cols());
  const Matrix eye_y = Matrix::Identity(v.cols(), v.cols());
  channel_.reserve(channel_counts.size());
  for (size_t c = 0; c < channel_counts.size(); ++c) {
    if (channel_counts[c] < 1)
      throw std::invalid_argument("channel " + std::to_string(c) +
                                  " has no samples");
    Matrix k = static_cast<double>(channel_counts[c]) * u_t_d_u_ + eye_x;
    Cholesky chol = FactorOrThrow(k, "channel precision K_" + std::to_string(c));
    const double log_det = LogDet(chol);
    channel_.push_back({std::move(k), std::move(chol), log_det});
  }
  speaker_.reserve(speaker_counts.size());
  for (size_t s = 0; s < speaker_counts.size(); ++s) {
    if (speaker_counts[s] < 1)
      throw std::invalid_argument("speaker " + std::to_string(s) +
                                  " has no samples");
    Matrix l = static_cast<double>(speaker_counts[s]) * v_t_d_v_ + eye_y;
    Cholesky chol = FactorOrThrow(l, "speaker precision L_" + std::to_string(s));
    const double log_det = LogDet(chol);
    speaker_.push_back({std::move(l), std::move(chol), log_det});
  }
}

PrecisionCache BuildPrecisions(const ModelParams &params,
                               const EmbeddingTable &table) {
  if (params.Dim() != table.Dim())
    throw InputError("model dimension " + std::to_string(params.Dim()) +
                     " does not match data dimension " +
                     std::to_string(table.Dim()));
  return PrecisionCache(params, table.SpeakerCounts(), table.ChannelCounts());
}

}  // namespace jplda
