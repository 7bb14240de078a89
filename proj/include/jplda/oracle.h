// include/jplda/oracle.h

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

#ifndef JPLDA_ORACLE_H_
#define JPLDA_ORACLE_H_

#include <span>
#include <vector>

#include "jplda/em-trainer.h"
#include "jplda/embedding-table.h"
#include "jplda/linalg.h"
#include "jplda/model.h"
#include "jplda/posterior.h"
#include "jplda/scoring.h"

// Brute-force references for property tests and `jplda verify`. Nothing
// here calls into the posterior, EM or scoring code paths: every quantity is
// assembled from the stacked linear-Gaussian form of the model and solved
// with one dense factorization.

namespace jplda::oracle {

/// Stacked form M = A [Y; X] + Z of the whole data set.
struct StackedSystem {
  Matrix design;          // (N d) x (S R_y + C R_x), latent order [Y; X]
  Vector noise_precision; // N d, the diagonal of D repeated N times
  int num_speakers = 0;
  int num_channels = 0;
  int speaker_rank = 0;
  int channel_rank = 0;

  int LatentDim() const {
    return num_speakers * speaker_rank + num_channels * channel_rank;
  }
};

StackedSystem BuildStackedSystem(const ModelParams &params,
                                 std::span<const int> speakers,
                                 std::span<const int> channels);

/// Gaussian posterior over all latents, ordered [y_1..y_S, x_1..x_C].
struct JointPosterior {
  Vector mean;
  Matrix covariance;
  int num_speakers = 0;
  int num_channels = 0;
  int speaker_rank = 0;
  int channel_rank = 0;

  Eigen::Index SpeakerOffset(int s) const {
    return static_cast<Eigen::Index>(s) * speaker_rank;
  }
  Eigen::Index ChannelOffset(int c) const {
    return static_cast<Eigen::Index>(num_speakers) * speaker_rank +
           static_cast<Eigen::Index>(c) * channel_rank;
  }
  Vector SpeakerMean(int s) const {
    return mean.segment(SpeakerOffset(s), speaker_rank);
  }
  Vector ChannelMean(int c) const {
    return mean.segment(ChannelOffset(c), channel_rank);
  }
  /// All channel factors stacked, with their joint covariance.
  Vector ChannelMeans() const;
  Matrix ChannelCovariance() const;
};

inline constexpr int kMaxOracleLatentDim = 256;
inline constexpr int kMaxOracleStackedDim = 512;

/// Precision I + A' D~ A and mean from one dense solve. Throws
/// CapacityError when S R_y + C R_x exceeds kMaxOracleLatentDim.
JointPosterior OraclePosterior(const ModelParams &params,
                               const EmbeddingTable &table);

/// Sums of posterior moments of z_i = [x_{c_i}; y_{s_i}] in the layout of
/// SufficientStats, computed from OraclePosterior.
SufficientStats OracleMoments(const ModelParams &params,
                              const EmbeddingTable &table);

/**
   log N(M | 1 (x) mean, C) where block (i, j) of C is
     [s_i == s_j] V V' + [c_i == c_j] U U' + [i == j] D^-1.
   The tie vectors are arbitrary non-negative group labels. Throws
   InputError on inconsistent lengths or negative labels and CapacityError
   when N d exceeds kMaxOracleStackedDim.
*/
double OracleLogDensity(const ModelParams &params,
                        std::span<const Vector> samples,
                        std::span<const int> speaker_ties,
                        std::span<const int> channel_ties);

/// Single-trial LLR as a ratio of prior-weighted mixtures of the four
/// tied-covariance densities.
double OracleTrialLlr(const ModelParams &params, const HypothesisPriors &priors,
                      const Vector &enroll, const Vector &test);

/// Unseen-channel LLR: same vs. different speaker density, with the test
/// sample in a channel of its own.
double OracleUnseenChannelLlr(const ModelParams &params,
                              std::span<const EnrollmentSample> enrollment,
                              const Vector &test);

/**
   Standard PLDA: every sample carries its own channel factor x_i, so the
   model factorizes over speakers. Used as the reference for the
   unique-channel degeneracy of Joint PLDA.
*/
class StandardPldaReference {
 public:
  explicit StandardPldaReference(ModelParams params);

  /// log p(E, T | same) / (p(E) p(T)) for one enrollment sample.
  double Llr(const Vector &enroll, const Vector &test) const;
  /// Multi-enrollment variant; enrollment samples have independent channels.
  double Llr(std::span<const Vector> enroll, const Vector &test) const;

  /// Per-sample channel posteriors (channel labels in the table are
  /// ignored), solved one speaker at a time.
  std::vector<ChannelMarginal> SampleChannelPosteriors(
      const EmbeddingTable &table) const;

  /// One EM iteration on the table; the mean is kept.
  ModelParams EmStep(const EmbeddingTable &table) const;

  const ModelParams &Params() const { return params_; }

 private:
  struct SpeakerPosterior {
    Vector mean;       // [y; x_1..x_n]
    Matrix covariance;
    std::vector<int> samples;
  };
  std::vector<SpeakerPosterior> SolveSpeakers(const EmbeddingTable &table) const;

  ModelParams params_;
};

}  // namespace jplda::oracle

#endif  // JPLDA_ORACLE_H_
