// src/posterior.cc

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

#include "jplda/posterior.h"

#include <string>

#include "centered.h"
#include "jplda/errors.h"

namespace jplda {

BlockOccupancy::BlockOccupancy(std::vector<std::vector<ChannelCount>> rows,
                               int num_channels, int block_dim)
    : rows_(std::move(rows)),
      num_channels_(num_channels),
      block_dim_(block_dim) {}

int BlockOccupancy::Count(int s, int c) const {
  for (const ChannelCount &e : rows_[s])
    if (e.channel == c) return e.count;
  return 0;
}

Matrix BlockOccupancy::ToDense() const {
  const Eigen::Index r = block_dim_;
  Matrix h = Matrix::Zero(NumSpeakers() * r, num_channels_ * r);
  for (int s = 0; s < NumSpeakers(); ++s)
    for (const ChannelCount &e : rows_[s])
      h.block(s * r, e.channel * r, r, r).diagonal().setConstant(e.count);
  return h;
}

BlockOccupancy BuildOccupancy(const EmbeddingTable &table, int channel_rank) {
  if (channel_rank < 1)
    throw std::invalid_argument("channel rank must be >= 1");
  std::vector<std::vector<ChannelCount>> rows(table.NumSpeakers());
  for (int s = 0; s < table.NumSpeakers(); ++s) rows[s] = table.SpeakerChannels(s);
  return BlockOccupancy(std::move(rows), table.NumChannels(), channel_rank);
}

InnerPosterior ComputeInnerPosterior(const ModelParams &params,
                                     const PrecisionCache &cache,
                                     const EmbeddingTable &raw_table,
                                     const InnerPosteriorOptions &options) {
  if (params.Dim() != raw_table.Dim())
    throw InputError("model and data dimensions differ");
  if (cache.NumSpeakers() != raw_table.NumSpeakers() ||
      cache.NumChannels() != raw_table.NumChannels())
    throw std::invalid_argument("precision cache built for different counts");
  const internal::CenteredTable table(raw_table, params.mean);

  const int num_speakers = table->NumSpeakers();
  const int num_channels = table->NumChannels();
  const int rx = params.ChannelRank();
  const int ry = params.SpeakerRank();
  const std::int64_t dim = static_cast<std::int64_t>(num_channels) * rx;
  if (dim > options.max_dense_dim)
    throw CapacityError("inner posterior dimension " + std::to_string(dim) +
                        " exceeds the dense-solve limit of " +
                        std::to_string(options.max_dense_dim));

  const Matrix &j = cache.Coupling();
  InnerPosterior post;
  post.num_channels = num_channels;
  post.channel_rank = rx;
  post.occupancy = BuildOccupancy(*table, rx);

  post.y_tilde.resize(ry, num_speakers);
  for (int s = 0; s < num_speakers; ++s)
    post.y_tilde.col(s) =
        cache.SpeakerFactor(s).solve(cache.ProjectV() * table->SpeakerSums().col(s));

  post.y_bar_tilde = Matrix::Zero(ry, num_channels);
  for (int s = 0; s < num_speakers; ++s)
    for (const ChannelCount &e : table->SpeakerChannels(s))
      post.y_bar_tilde.col(e.channel) += static_cast<double>(e.count) * post.y_tilde.col(s);

  post.phi.resize(dim);
  for (int c = 0; c < num_channels; ++c)
    post.phi.segment(c * rx, rx) =
        cache.ProjectU() * table->ChannelSums().col(c) -
        j * post.y_bar_tilde.col(c);

  Matrix precision = Matrix::Zero(dim, dim);
  for (int c = 0; c < num_channels; ++c)
    precision.block(c * rx, c * rx, rx, rx) = cache.ChannelPrecision(c);

  post.speaker_coupling.reserve(num_speakers);
  for (int s = 0; s < num_speakers; ++s) {
    Matrix a = j * cache.SpeakerFactor(s).solve(j.transpose());
    a = 0.5 * (a + a.transpose());
    for (const ChannelCount &e1 : table->SpeakerChannels(s))
      for (const ChannelCount &e2 : table->SpeakerChannels(s))
        precision.block(e1.channel * rx, e2.channel * rx, rx, rx) -=
            static_cast<double>(e1.count) * e2.count * a;
    post.speaker_coupling.push_back(std::move(a));
  }

  const Cholesky chol = FactorOrThrow(precision, "inner posterior precision");
  post.log_det_sigma = -LogDet(chol);
  post.x_hat = chol.solve(post.phi);
  post.sigma = chol.solve(Matrix::Identity(dim, dim));
  post.sigma = 0.5 * (post.sigma + post.sigma.transpose()).eval();
  return post;
}

ChannelMarginal MarginalChannel(const InnerPosterior &inner, int c) {
  if (c < 0 || c >= inner.num_channels)
    throw std::out_of_range("channel " + std::to_string(c) + " out of range");
  return {inner.ChannelMean(c), inner.CovarianceBlock(c, c)};
}

OuterPosterior ComputeOuterPosterior(const PrecisionCache &cache,
                                     const EmbeddingTable &table,
                                     const InnerPosterior &inner) {
  const int num_speakers = table.NumSpeakers();
  const int rx = inner.channel_rank;
  if (inner.num_channels != table.NumChannels() ||
      inner.y_tilde.cols() != num_speakers)
    throw std::invalid_argument("inner posterior built for a different table");

  OuterPosterior outer;
  outer.y_tilde = inner.y_tilde;
  outer.x_bar = Matrix::Zero(rx, num_speakers);
  for (int s = 0; s < num_speakers; ++s)
    for (const ChannelCount &e : table.SpeakerChannels(s))
      outer.x_bar.col(s) += static_cast<double>(e.count) * inner.ChannelMean(e.channel);

  const Matrix j_t = cache.Coupling().transpose();
  outer.y_hat.resize(inner.y_tilde.rows(), num_speakers);
  outer.covariances.reserve(num_speakers);
  for (int s = 0; s < num_speakers; ++s) {
    const Cholesky &l = cache.SpeakerFactor(s);
    outer.y_hat.col(s) = outer.y_tilde.col(s) - l.solve(j_t * outer.x_bar.col(s));
    Matrix cov = l.solve(Matrix::Identity(l.rows(), l.cols()));
    outer.covariances.push_back(0.5 * (cov + cov.transpose()));
  }
  return outer;
}

}  // namespace jplda
