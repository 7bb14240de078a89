// include/jplda/em-trainer.h

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

#ifndef JPLDA_EM_TRAINER_H_
#define JPLDA_EM_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "jplda/embedding-table.h"
#include "jplda/model.h"
#include "jplda/posterior.h"

namespace jplda {

/**
   EM statistics over the stacked latent z_i = [x_{c_i}; y_{s_i}]:
     scatter      S = sum_i m_i m_i^T                    (d x d)
     first_moment T = sum_i <z_i> m_i^T                  ((R_x+R_y) x d)
     second_moment R = sum_i <z_i z_i^T>                 ((R_x+R_y)^2)
   with data centered by the model mean.
*/
struct SufficientStats {
  Matrix scatter;
  Matrix first_moment;
  Matrix second_moment;
  std::int64_t num_samples = 0;
  int channel_rank = 0;
  int speaker_rank = 0;

  auto Tx() const { return first_moment.topRows(channel_rank); }
  auto Ty() const { return first_moment.bottomRows(speaker_rank); }
  auto Rxx() const {
    return second_moment.topLeftCorner(channel_rank, channel_rank);
  }
  auto Ryx() const {
    return second_moment.bottomLeftCorner(speaker_rank, channel_rank);
  }
  auto Ryy() const {
    return second_moment.bottomRightCorner(speaker_rank, speaker_rank);
  }
};

struct TrainConfig {
  int speaker_rank = 1;
  int channel_rank = 1;
  int max_iters = 200;
  double rel_tol = 1e-6;  // stop when |delta LL| < rel_tol |LL|; 0 disables
  std::uint64_t seed = 0;
  InnerPosteriorOptions inner;

  void Validate() const;
};

enum class StopReason { kMaxIterations, kConverged };

struct TrainTrace {
  /// log p(M | lambda_k), evaluated before the k-th M-step.
  std::vector<double> log_likelihoods;
  ModelParams params;
  int iterations = 0;  // completed E/M cycles
  StopReason stop_reason = StopReason::kMaxIterations;
};

/// Called once per evaluated log-likelihood: (iteration, loglik, delta).
using IterationCallback = std::function<void(int, double, double)>;

/// Seeded initialization: mean = data mean, loadings standard normal scaled
/// by the overall data standard deviation over sqrt(rank), precision = the
/// inverse per-dimension variance. Dimensions with zero variance get
/// precision 1e8 and are listed in `clamped_dims` when given.
ModelParams InitParams(const EmbeddingTable &table, const TrainConfig &config,
                       std::vector<int> *clamped_dims = nullptr);

/// Exact log p(M | lambda), including the -(N d / 2) log 2 pi constant.
double LogMarginalLikelihood(const ModelParams &params,
                             const PrecisionCache &cache,
                             const EmbeddingTable &table,
                             const InnerPosterior &inner);

SufficientStats EStep(const ModelParams &params, const PrecisionCache &cache,
                      const EmbeddingTable &table, const InnerPosterior &inner);
SufficientStats EStep(const ModelParams &params, const PrecisionCache &cache,
                      const EmbeddingTable &table,
                      const InnerPosteriorOptions &options = {});

struct ModelUpdate {
  Matrix channel_loadings;  // U
  Matrix speaker_loadings;  // V
  Vector precision;
};

/// W^T = R^-1 T with W = [U V]; D^-1 = diag(S - W T) / N.
ModelUpdate MStep(const SufficientStats &stats);

TrainTrace Train(const EmbeddingTable &table, const TrainConfig &config,
                 const IterationCallback &callback = {});

/// Runs EM from the given parameters. Their mean is kept fixed.
TrainTrace TrainFrom(const EmbeddingTable &table, const ModelParams &init,
                     const TrainConfig &config,
                     const IterationCallback &callback = {});

}  // namespace jplda

#endif  // JPLDA_EM_TRAINER_H_
