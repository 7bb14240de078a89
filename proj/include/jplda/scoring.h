// include/jplda/scoring.h

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

#ifndef JPLDA_SCORING_H_
#define JPLDA_SCORING_H_

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jplda/embedding-table.h"
#include "jplda/linalg.h"
#include "jplda/model.h"

namespace jplda {

/// A verification log-likelihood ratio split into the speaker (outer) and
/// channel (inner) parts. The Q terms are 1/2 log|Sigma| + 1/2 Phi' Sigma Phi
/// of each hypothesis' channel posterior; unused ones are NaN.
struct TrialScore {
  double llr = 0.0;
  double llr_outer = 0.0;
  double llr_inner = 0.0;

  // Single enrollment / single test, keyed (channel, speaker) hypothesis.
  double q_sc_ss = std::numeric_limits<double>::quiet_NaN();
  double q_dc_ss = std::numeric_limits<double>::quiet_NaN();
  double q_sc_ds = std::numeric_limits<double>::quiet_NaN();
  double q_dc_ds = std::numeric_limits<double>::quiet_NaN();

  // Unseen test channel, keyed by speaker hypothesis.
  double q_ss = std::numeric_limits<double>::quiet_NaN();
  double q_ds = std::numeric_limits<double>::quiet_NaN();
};

/**
   Scores single-enrollment / single-test trials. The speaker hypotheses
   are compared after marginalizing over whether the two sides share a
   channel factor, weighted by the given priors.

   All data-independent matrices (L_S, L_D and the four channel-posterior
   precisions) are factored once at construction, so Score() only does
   projections and small triangular solves. Thread-safe for concurrent
   Score() calls.
*/
class TrialScorer {
 public:
  TrialScorer(const ModelParams &params, const HypothesisPriors &priors);

  TrialScore Score(const Vector &enroll, const Vector &test) const;

  const ModelParams &Params() const { return params_; }
  const HypothesisPriors &Priors() const { return priors_; }

 private:
  struct ChannelHypothesis {
    Cholesky precision;
    double log_det_sigma = 0.0;

    double Q(const Vector &phi) const {
      return 0.5 * log_det_sigma + 0.5 * phi.dot(precision.solve(phi));
    }
  };

  ModelParams params_;
  HypothesisPriors priors_;
  Matrix u_t_d_, v_t_d_;
  Cholesky l_same_, l_diff_;  // 2 V'DV + I, V'DV + I
  double log_det_l_same_ = 0.0, log_det_l_diff_ = 0.0;
  Matrix j_l_same_, j_l_diff_;  // J L_S^-1, J L_D^-1
  ChannelHypothesis sc_ss_, sc_ds_, dc_ss_, dc_ds_;
};

TrialScore ScoreTrial(const ModelParams &params,
                      const HypothesisPriors &priors, const Vector &enroll,
                      const Vector &test);

struct EnrollmentSample {
  Vector features;
  int channel = 0;  // any ids; remapped by first occurrence
};

/**
   Scores n_E enrollment samples over C known channels against one test
   sample recorded in a channel none of them used. Same-speaker ties a
   single speaker factor across all n_E + 1 samples; the test channel
   factor is always separate. Throws InputError on empty enrollment or a
   dimension mismatch, NumericalError on a non-positive-definite precision.
*/
TrialScore ScoreUnseenChannel(const ModelParams &params,
                              std::span<const EnrollmentSample> enrollment,
                              const Vector &test);

struct Trial {
  std::string enroll_id;
  std::string test_id;
  std::optional<bool> target;
  int line = 0;  // 1-based source line, 0 when not from a file
};

/// Scores each trial by sample id lookup; output order follows input.
/// Unknown ids raise InputError naming the id and line.
std::vector<TrialScore> ScoreTrialList(const ModelParams &params,
                                       const HypothesisPriors &priors,
                                       const EmbeddingTable &enroll_table,
                                       const EmbeddingTable &test_table,
                                       std::span<const Trial> trials);

/**
   Equal error rate from the convex hull of the ROC: the point where miss
   and false-alarm rates coincide, interpolating linearly between the two
   hull operating points that bracket it. Returns a proportion in [0, 1].
*/
double ComputeEer(std::span<const double> target_scores,
                  std::span<const double> nontarget_scores);

}  // namespace jplda

#endif  // JPLDA_SCORING_H_
