// include/jplda/posterior.h

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

#ifndef JPLDA_POSTERIOR_H_
#define JPLDA_POSTERIOR_H_

#include <cstdint>
#include <vector>

#include "jplda/embedding-table.h"
#include "jplda/linalg.h"
#include "jplda/model.h"

namespace jplda {

/**
   The S R_x x C R_x occupancy matrix H whose (s, c) block is n_sc I, kept
   as one sparse row of (channel, count) pairs per speaker.
*/
class BlockOccupancy {
 public:
  BlockOccupancy() = default;
  BlockOccupancy(std::vector<std::vector<ChannelCount>> rows,
                 int num_channels, int block_dim);

  int NumSpeakers() const { return static_cast<int>(rows_.size()); }
  int NumChannels() const { return num_channels_; }
  int BlockDim() const { return block_dim_; }
  const std::vector<ChannelCount> &Row(int s) const { return rows_[s]; }
  int Count(int s, int c) const;

  Matrix ToDense() const;

 private:
  std::vector<std::vector<ChannelCount>> rows_;
  int num_channels_ = 0;
  int block_dim_ = 0;
};

BlockOccupancy BuildOccupancy(const EmbeddingTable &table, int channel_rank);

struct InnerPosteriorOptions {
  /// Upper bound on C * R_x for the dense precision factorization.
  std::int64_t max_dense_dim = 20000;
};

/**
   Posterior over all channel factors X = [x_1; ...; x_C] with the speaker
   factors integrated out:  p(X | M) = N(X | x_hat, sigma), where

     sigma^-1 = diag(K_1..K_C) - H^T diag(J L_s^-1 J^T) H,
     phi      = (U^T D g_c - J ybar_c)_c,     x_hat = sigma phi,

   and ybar_c sums the channel-ignorant speaker means over channel c.
*/
struct InnerPosterior {
  int num_channels = 0;
  int channel_rank = 0;

  Vector x_hat;          // C R_x
  Matrix sigma;          // (C R_x)^2, symmetric positive definite
  Vector phi;            // C R_x
  double log_det_sigma = 0.0;

  Matrix y_tilde;        // R_y x S, L_s^-1 V^T D f_s
  Matrix y_bar_tilde;    // R_y x C, sum over samples in c of y_tilde
  std::vector<Matrix> speaker_coupling;  // J L_s^-1 J^T per speaker
  BlockOccupancy occupancy;

  auto ChannelMean(int c) const {
    return x_hat.segment(static_cast<Eigen::Index>(c) * channel_rank,
                         channel_rank);
  }
  auto CovarianceBlock(int c1, int c2) const {
    return sigma.block(static_cast<Eigen::Index>(c1) * channel_rank,
                       static_cast<Eigen::Index>(c2) * channel_rank,
                       channel_rank, channel_rank);
  }
};

/// Throws CapacityError when C R_x exceeds the limit, NumericalError when
/// the posterior precision does not factor. The table is centered by
/// params.mean internally.
InnerPosterior ComputeInnerPosterior(const ModelParams &params,
                                     const PrecisionCache &cache,
                                     const EmbeddingTable &table,
                                     const InnerPosteriorOptions &options = {});

struct ChannelMarginal {
  Vector mean;
  Matrix covariance;
};

ChannelMarginal MarginalChannel(const InnerPosterior &inner, int c);

/// Per-speaker posterior of y_s; conditionally on X it is
/// N(y_tilde_s - L_s^-1 J^T xbar_s, L_s^-1), here evaluated at X = x_hat.
struct OuterPosterior {
  Matrix y_tilde;  // R_y x S
  Matrix y_hat;    // R_y x S
  Matrix x_bar;    // R_x x S, sum over samples of s of x_hat_{c_i}
  std::vector<Matrix> covariances;  // L_s^-1
};

OuterPosterior ComputeOuterPosterior(const PrecisionCache &cache,
                                     const EmbeddingTable &table,
                                     const InnerPosterior &inner);

}  // namespace jplda

#endif  // JPLDA_POSTERIOR_H_
