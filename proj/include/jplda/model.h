// include/jplda/model.h

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

#ifndef JPLDA_MODEL_H_
#define JPLDA_MODEL_H_

#include <span>
#include <vector>

#include "jplda/embedding-table.h"
#include "jplda/linalg.h"

namespace jplda {

/**
   Joint PLDA parameters. A sample with speaker s and channel c is modeled as

     m = mean + V y_s + U x_c + z,   y_s ~ N(0, I), x_c ~ N(0, I),
                                     z ~ N(0, diag(precision)^-1),

   where y_s is shared by every sample of speaker s and x_c by every sample
   recorded in channel c.
*/
struct ModelParams {
  Matrix speaker_loadings;  // V, d x R_y
  Matrix channel_loadings;  // U, d x R_x
  Vector precision;         // diagonal of D, strictly positive
  Vector mean;              // d

  int Dim() const { return static_cast<int>(mean.size()); }
  int SpeakerRank() const {
    return static_cast<int>(speaker_loadings.cols());
  }
  int ChannelRank() const {
    return static_cast<int>(channel_loadings.cols());
  }

  /// Throws std::invalid_argument on inconsistent shapes, ranks outside
  /// [1, d] or a non-positive precision entry.
  void Validate() const;
};

/// Channel-hypothesis priors conditioned on the speaker hypothesis.
struct HypothesisPriors {
  double same_channel_same_speaker = 0.5;  // P(H_SC | H_SS)
  double diff_channel_same_speaker = 0.5;  // P(H_DC | H_SS)
  double same_channel_diff_speaker = 0.5;  // P(H_SC | H_DS)
  double diff_channel_diff_speaker = 0.5;  // P(H_DC | H_DS)

  /// Both pairs must lie in [0, 1] and sum to one within `tol`.
  void Validate(double tol = 1e-9) const;
};

/**
   Count-dependent precisions shared by the E-step and the scorers:
   J = U^T D V, K_c = n_c U^T D U + I, L_s = n_s V^T D V + I.
*/
class PrecisionCache {
 public:
  PrecisionCache(const ModelParams &params,
                 std::span<const int> speaker_counts,
                 std::span<const int> channel_counts);

  const Matrix &Coupling() const { return coupling_; }  // J
  const Matrix &ProjectU() const { return u_t_d_; }     // U^T D
  const Matrix &ProjectV() const { return v_t_d_; }     // V^T D
  const Matrix &UtDU() const { return u_t_d_u_; }
  const Matrix &VtDV() const { return v_t_d_v_; }

  int NumChannels() const { return static_cast<int>(channel_.size()); }
  int NumSpeakers() const { return static_cast<int>(speaker_.size()); }

  const Matrix &ChannelPrecision(int c) const { return channel_[c].matrix; }
  const Cholesky &ChannelFactor(int c) const { return channel_[c].factor; }
  double ChannelLogDet(int c) const { return channel_[c].log_det; }

  const Matrix &SpeakerPrecision(int s) const { return speaker_[s].matrix; }
  const Cholesky &SpeakerFactor(int s) const { return speaker_[s].factor; }
  double SpeakerLogDet(int s) const { return speaker_[s].log_det; }

 private:
  struct Entry {
    Matrix matrix;
    Cholesky factor;
    double log_det;
  };

  Matrix coupling_, u_t_d_, v_t_d_, u_t_d_u_, v_t_d_v_;
  std::vector<Entry> channel_;
  std::vector<Entry> speaker_;
};

PrecisionCache BuildPrecisions(const ModelParams &params,
                               const EmbeddingTable &table);

}  // namespace jplda

#endif  // JPLDA_MODEL_H_
