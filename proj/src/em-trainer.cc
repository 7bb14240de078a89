// src/em-trainer.cc

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

#include "jplda/em-trainer.h"

#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>

#include "centered.h"
#include "jplda/errors.h"

namespace jplda {

namespace {

constexpr double kClampedPrecision = 1e8;

}  // namespace

void TrainConfig::Validate() const {
  if (speaker_rank < 1 || channel_rank < 1)
    throw std::invalid_argument("subspace ranks must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be >= 0");
}

ModelParams InitParams(const EmbeddingTable &table, const TrainConfig &config,
                       std::vector<int> *clamped_dims) {
  config.Validate();
  const int d = table.Dim();
  if (config.speaker_rank > d || config.channel_rank > d)
    throw std::invalid_argument("subspace ranks must not exceed dimension " +
                                std::to_string(d));

  ModelParams params;
  params.mean = table.Mean();
  const Matrix centered = table.Samples().colwise() - params.mean;
  const Vector variance =
      centered.array().square().rowwise().sum() / table.NumSamples();
  const double total_std = std::sqrt(variance.mean());

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  params.speaker_loadings.resize(d, config.speaker_rank);
  for (Eigen::Index k = 0; k < params.speaker_loadings.size(); ++k)
    params.speaker_loadings(k) =
        normal(rng) * total_std / std::sqrt(config.speaker_rank);
  params.channel_loadings.resize(d, config.channel_rank);
  for (Eigen::Index k = 0; k < params.channel_loadings.size(); ++k)
    params.channel_loadings(k) =
        normal(rng) * total_std / std::sqrt(config.channel_rank);

  params.precision.resize(d);
  if (clamped_dims) clamped_dims->clear();
  for (int i = 0; i < d; ++i) {
    if (variance(i) > 0.0) {
      params.precision(i) = std::min(1.0 / variance(i), kClampedPrecision);
    } else {
      params.precision(i) = kClampedPrecision;
      if (clamped_dims) clamped_dims->push_back(i);
    }
  }
  return params;
}

double LogMarginalLikelihood(const ModelParams &params,
                             const PrecisionCache &cache,
                             const EmbeddingTable &raw_table,
                             const InnerPosterior &inner) {
  const internal::CenteredTable table(raw_table, params.mean);
  const double n = table->NumSamples();
  const double d = table->Dim();

  const double quad =
      (table->Samples().array().square().colwise() * params.precision.array())
          .sum();
  double ll = -0.5 * quad + 0.5 * n * params.precision.array().log().sum() -
              0.5 * n * d * kLog2Pi;

  for (int s = 0; s < table->NumSpeakers(); ++s) {
    const Vector a = cache.ProjectV() * table->SpeakerSums().col(s);
    ll += 0.5 * inner.y_tilde.col(s).dot(a) - 0.5 * cache.SpeakerLogDet(s);
  }
  ll += 0.5 * inner.x_hat.dot(inner.phi) + 0.5 * inner.log_det_sigma;
  return ll;
}

SufficientStats EStep(const ModelParams &params, const PrecisionCache &cache,
                      const EmbeddingTable &raw_table,
                      const InnerPosterior &inner) {
  const internal::CenteredTable table(raw_table, params.mean);
  const int rx = params.ChannelRank();
  const int ry = params.SpeakerRank();
  const int d = params.Dim();

  SufficientStats stats;
  stats.num_samples = table->NumSamples();
  stats.channel_rank = rx;
  stats.speaker_rank = ry;
  stats.scatter = table->Samples() * table->Samples().transpose();
  stats.first_moment = Matrix::Zero(rx + ry, d);
  stats.second_moment = Matrix::Zero(rx + ry, rx + ry);

  const OuterPosterior outer = ComputeOuterPosterior(cache, *table, inner);
  const Matrix &j = cache.Coupling();

  Matrix t_x = Matrix::Zero(rx, d);
  Matrix r_xx = Matrix::Zero(rx, rx);
  for (int c = 0; c < table->NumChannels(); ++c) {
    const auto x = inner.ChannelMean(c);
    t_x.noalias() += x * table->ChannelSums().col(c).transpose();
    r_xx += static_cast<double>(table->ChannelCounts()[c]) *
            (Matrix(inner.CovarianceBlock(c, c)) + x * x.transpose());
  }

  Matrix t_y = Matrix::Zero(ry, d);
  Matrix r_yx = Matrix::Zero(ry, rx);
  Matrix r_yy = Matrix::Zero(ry, ry);
  Matrix xx(rx, rx);
  for (int s = 0; s < table->NumSpeakers(); ++s) {
    const auto f = table->SpeakerSums().col(s);
    t_y.noalias() += outer.y_hat.col(s) * f.transpose();

    // <xbar_s xbar_s^T> = xbar xbar^T + sum_{c,c'} n_sc n_sc' Sigma_{c,c'}
    const Vector xbar = outer.x_bar.col(s);
    xx.noalias() = xbar * xbar.transpose();
    for (const ChannelCount &e1 : table->SpeakerChannels(s))
      for (const ChannelCount &e2 : table->SpeakerChannels(s))
        xx += static_cast<double>(e1.count) * e2.count *
              inner.CovarianceBlock(e1.channel, e2.channel);

    const Vector a = cache.ProjectV() * f;
    const Matrix &l_inv = outer.covariances[s];
    r_yx += l_inv * (a * xbar.transpose() - j.transpose() * xx);

    const Matrix jt_xbar_a = j.transpose() * xbar * a.transpose();
    const Matrix inner_moment = a * a.transpose() - jt_xbar_a -
                                jt_xbar_a.transpose() +
                                j.transpose() * xx * j;
    r_yy += static_cast<double>(table->SpeakerCounts()[s]) * (l_inv + l_inv * inner_moment * l_inv);
  }

  stats.first_moment.topRows(rx) = t_x;
  stats.first_moment.bottomRows(ry) = t_y;
  stats.second_moment.topLeftCorner(rx, rx) = 0.5 * (r_xx + r_xx.transpose());
  stats.second_moment.bottomLeftCorner(ry, rx) = r_yx;
  stats.second_moment.topRightCorner(rx, ry) = r_yx.transpose();
  stats.second_moment.bottomRightCorner(ry, ry) = 0.5 * (r_yy + r_yy.transpose());
  return stats;
}

SufficientStats EStep(const ModelParams &params, const PrecisionCache &cache,
                      const EmbeddingTable &table,
                      const InnerPosteriorOptions &options) {
  const InnerPosterior inner =
      ComputeInnerPosterior(params, cache, table, options);
  return EStep(params, cache, table, inner);
}

ModelUpdate MStep(const SufficientStats &stats) {
  if (stats.num_samples < 1)
    throw std::invalid_argument("M-step needs at least one sample");
  const int rx = stats.channel_rank;
  const Cholesky r = FactorOrThrow(
      stats.second_moment, "second-moment statistic R (degenerate statistics)");
  const Matrix w_t = r.solve(stats.first_moment);  // (R_x + R_y) x d
  const Matrix w = w_t.transpose();

  const Vector residual =
      (stats.scatter.diagonal() -
       (w * stats.first_moment).diagonal()) / static_cast<double>(stats.num_samples);

  ModelUpdate update;
  update.channel_loadings = w.leftCols(rx);
  update.speaker_loadings = w.rightCols(stats.speaker_rank);
  update.precision.resize(residual.size());
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    if (!(residual(i) > 0.0) || !std::isfinite(residual(i)))
      throw NumericalError("residual variance of dimension " +
                           std::to_string(i) + " is not positive (" +
                           std::to_string(residual(i)) + ")");
    update.precision(i) = 1.0 / residual(i);
  }
  return update;
}

TrainTrace Train(const EmbeddingTable &table, const TrainConfig &config,
                 const IterationCallback &callback) {
  std::vector<int> clamped;
  ModelParams init = InitParams(table, config, &clamped);
  for (int dim : clamped)
    std::cerr << "jplda: dimension " << dim
              << " has zero variance; precision clamped to "
              << kClampedPrecision << "\n";
  return TrainFrom(table, init, config, callback);
}

TrainTrace TrainFrom(const EmbeddingTable &table, const ModelParams &init,
                     const TrainConfig &config,
                     const IterationCallback &callback) {
  config.Validate();
  init.Validate();
  if (init.Dim() != table.Dim())
    throw InputError("initial model and data dimensions differ");

  // EM runs on centered data with a zero-mean working model.
  const EmbeddingTable centered = Center(table, init.mean);
  ModelParams work = init;
  work.mean = Vector::Zero(init.Dim());

  TrainTrace trace;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    try {
      const PrecisionCache cache = BuildPrecisions(work, centered);
      const InnerPosterior inner =
          ComputeInnerPosterior(work, cache, centered, config.inner);
      const double ll = LogMarginalLikelihood(work, cache, centered, inner);
      const double delta =
          trace.log_likelihoods.empty() ? 0.0 : ll - trace.log_likelihoods.back();
      const bool converged =
          !trace.log_likelihoods.empty() &&
          std::abs(delta) < config.rel_tol * std::abs(trace.log_likelihoods.back());
      trace.log_likelihoods.push_back(ll);
      if (callback) callback(iter, ll, delta);
      if (converged) {
        trace.stop_reason = StopReason::kConverged;
        break;
      }
      const ModelUpdate update = MStep(EStep(work, cache, centered, inner));
      work.channel_loadings = update.channel_loadings;
      work.speaker_loadings = update.speaker_loadings;
      work.precision = update.precision;
      ++trace.iterations;
    } catch (const NumericalError &e) {
      throw NumericalError("EM iteration " + std::to_string(iter) + ": " +
                           e.what());
    } catch (const CapacityError &e) {
      throw CapacityError("EM iteration " + std::to_string(iter) + ": " +
                          e.what());
    }
  }
  trace.params = work;
  trace.params.mean = init.mean;
  return trace;
}

}  // namespace jplda
