// src/oracle.cc

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

#include "jplda/oracle.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "jplda/errors.h"

namespace jplda::oracle {

namespace {

int GroupCount(std::span<const int> labels) {
  int n = 0;
  for (int l : labels) {
    if (l < 0) throw InputError("tie labels must be non-negative");
    n = std::max(n, l + 1);
  }
  return n;
}

Eigen::LLT<Matrix> DenseFactor(const Matrix &m, const char *what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string("oracle: ") + what +
                         " is not positive definite");
  return llt;
}

Vector Stack(const Matrix &columns) {
  return Eigen::Map<const Vector>(columns.data(), columns.size());
}

}  // namespace

Vector JointPosterior::ChannelMeans() const {
  return mean.tail(static_cast<Eigen::Index>(num_channels) * channel_rank);
}

Matrix JointPosterior::ChannelCovariance() const {
  const Eigen::Index n = static_cast<Eigen::Index>(num_channels) * channel_rank;
  return covariance.bottomRightCorner(n, n);
}

StackedSystem BuildStackedSystem(const ModelParams &params,
                                 std::span<const int> speakers,
                                 std::span<const int> channels) {
  if (speakers.size() != channels.size())
    throw InputError("speaker and channel label counts differ");
  StackedSystem sys;
  sys.num_speakers = GroupCount(speakers);
  sys.num_channels = GroupCount(channels);
  sys.speaker_rank = params.SpeakerRank();
  sys.channel_rank = params.ChannelRank();
  const int d = params.Dim();
  const Eigen::Index n = static_cast<Eigen::Index>(speakers.size());
  const Eigen::Index y_cols =
      static_cast<Eigen::Index>(sys.num_speakers) * sys.speaker_rank;

  sys.design = Matrix::Zero(n * d, sys.LatentDim());
  sys.noise_precision.resize(n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.design.block(i * d, speakers[i] * sys.speaker_rank, d,
                     sys.speaker_rank) = params.speaker_loadings;
    sys.design.block(i * d, y_cols + channels[i] * sys.channel_rank, d,
                     sys.channel_rank) = params.channel_loadings;
    sys.noise_precision.segment(i * d, d) = params.precision;
  }
  return sys;
}

JointPosterior OraclePosterior(const ModelParams &params,
                               const EmbeddingTable &table) {
  params.Validate();
  const StackedSystem sys =
      BuildStackedSystem(params, table.SpeakerLabels(), table.ChannelLabels());
  if (sys.LatentDim() > kMaxOracleLatentDim)
    throw CapacityError("oracle posterior limited to " +
                        std::to_string(kMaxOracleLatentDim) + " latent dims");
  const Vector data =
      Stack(table.Samples().colwise() - params.mean);  // sample-major

  const Matrix weighted = sys.noise_precision.asDiagonal() * sys.design;
  const Matrix precision =
      Matrix::Identity(sys.LatentDim(), sys.LatentDim()) +
      sys.design.transpose() * weighted;
  const Eigen::LLT<Matrix> llt = DenseFactor(precision, "posterior precision");

  JointPosterior post;
  post.num_speakers = sys.num_speakers;
  post.num_channels = sys.num_channels;
  post.speaker_rank = sys.speaker_rank;
  post.channel_rank = sys.channel_rank;
  post.mean = llt.solve(weighted.transpose() * data);
  post.covariance =
      llt.solve(Matrix::Identity(sys.LatentDim(), sys.LatentDim()));
  return post;
}

SufficientStats OracleMoments(const ModelParams &params,
                              const EmbeddingTable &table) {
  const JointPosterior post = OraclePosterior(params, table);
  const int rx = params.ChannelRank(), ry = params.SpeakerRank();
  const int d = params.Dim();

  SufficientStats stats;
  stats.num_samples = table.NumSamples();
  stats.channel_rank = rx;
  stats.speaker_rank = ry;
  stats.scatter = Matrix::Zero(d, d);
  stats.first_moment = Matrix::Zero(rx + ry, d);
  stats.second_moment = Matrix::Zero(rx + ry, rx + ry);

  std::vector<Eigen::Index> idx(rx + ry);
  for (int i = 0; i < table.NumSamples(); ++i) {
    const Vector m = table.Sample(i) - params.mean;
    const Eigen::Index xo = post.ChannelOffset(table.Channel(i));
    const Eigen::Index yo = post.SpeakerOffset(table.Speaker(i));
    for (int k = 0; k < rx; ++k) idx[k] = xo + k;
    for (int k = 0; k < ry; ++k) idx[rx + k] = yo + k;

    Vector z(rx + ry);
    Matrix zz(rx + ry, rx + ry);
    for (int a = 0; a < rx + ry; ++a) {
      z(a) = post.mean(idx[a]);
      for (int b = 0; b < rx + ry; ++b)
        zz(a, b) = post.covariance(idx[a], idx[b]);
    }
    zz += z * z.transpose();
    stats.scatter += m * m.transpose();
    stats.first_moment += z * m.transpose();
    stats.second_moment += zz;
  }
  return stats;
}

double OracleLogDensity(const ModelParams &params,
                        std::span<const Vector> samples,
                        std::span<const int> speaker_ties,
                        std::span<const int> channel_ties) {
  params.Validate();
  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  if (n == 0) throw InputError("oracle density needs at least one sample");
  if (speaker_ties.size() != samples.size() ||
      channel_ties.size() != samples.size())
    throw InputError("tie partitions must label every sample");
  GroupCount(speaker_ties);
  GroupCount(channel_ties);
  const int d = params.Dim();
  if (n * d > kMaxOracleStackedDim)
    throw CapacityError("oracle density limited to " +
                        std::to_string(kMaxOracleStackedDim) + " stacked dims");

  const Matrix vv = params.speaker_loadings * params.speaker_loadings.transpose();
  const Matrix uu = params.channel_loadings * params.channel_loadings.transpose();
  const Matrix noise = params.precision.cwiseInverse().asDiagonal();

  Matrix cov = Matrix::Zero(n * d, n * d);
  Vector x(n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[i].size() != d) throw InputError("sample dimension mismatch");
    x.segment(i * d, d) = samples[i] - params.mean;
    for (Eigen::Index j = 0; j < n; ++j) {
      auto block = cov.block(i * d, j * d, d, d);
      if (speaker_ties[i] == speaker_ties[j]) block += vv;
      if (channel_ties[i] == channel_ties[j]) block += uu;
      if (i == j) block += noise;
    }
  }
  const Eigen::LLT<Matrix> llt = DenseFactor(cov, "marginal covariance");
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Vector w = llt.matrixL().solve(x);
  return -0.5 * (static_cast<double>(n * d) * kLog2Pi + log_det + w.squaredNorm());
}

double OracleTrialLlr(const ModelParams &params, const HypothesisPriors &priors,
                      const Vector &enroll, const Vector &test) {
  const std::vector<Vector> pair{enroll, test};
  const std::vector<int> tied{0, 0}, untied{0, 1};
  const double ss_sc = OracleLogDensity(params, pair, tied, tied);
  const double ss_dc = OracleLogDensity(params, pair, tied, untied);
  const double ds_sc = OracleLogDensity(params, pair, untied, tied);
  const double ds_dc = OracleLogDensity(params, pair, untied, untied);
  auto mix = [](double p1, double l1, double p2, double l2) {
    const double a = std::log(p1) + l1, b = std::log(p2) + l2;
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  };
  return mix(priors.same_channel_same_speaker, ss_sc,
             priors.diff_channel_same_speaker, ss_dc) -
         mix(priors.same_channel_diff_speaker, ds_sc,
             priors.diff_channel_diff_speaker, ds_dc);
}

double OracleUnseenChannelLlr(const ModelParams &params,
                              std::span<const EnrollmentSample> enrollment,
                              const Vector &test) {
  if (enrollment.empty()) throw InputError("enrollment set is empty");
  std::vector<Vector> samples;
  std::vector<int> channels;
  int next_channel = 0;
  std::unordered_map<int, int> remap;
  for (const EnrollmentSample &e : enrollment) {
    samples.push_back(e.features);
    auto [it, inserted] = remap.try_emplace(e.channel, next_channel);
    if (inserted) ++next_channel;
    channels.push_back(it->second);
  }
  samples.push_back(test);
  channels.push_back(next_channel);

  std::vector<int> same(samples.size(), 0), diff(samples.size(), 0);
  diff.back() = 1;
  return OracleLogDensity(params, samples, same, channels) -
         OracleLogDensity(params, samples, diff, channels);
}

StandardPldaReference::StandardPldaReference(ModelParams params)
    : params_(std::move(params)) {
  params_.Validate();
}

double StandardPldaReference::Llr(const Vector &enroll,
                                  const Vector &test) const {
  const Vector e[] = {enroll};
  return Llr(std::span<const Vector>(e), test);
}

double StandardPldaReference::Llr(std::span<const Vector> enroll,
                                  const Vector &test) const {
  // With untied channels the within-speaker covariance is W = U U' + D^-1.
  // The test sample's predictive density given the enrollment is compared
  // with its prior marginal.
  const Matrix &v = params_.speaker_loadings;
  const Matrix within =
      params_.channel_loadings * params_.channel_loadings.transpose() +
      Matrix(params_.precision.cwiseInverse().asDiagonal());
  const Eigen::LLT<Matrix> w_llt = DenseFactor(within, "within covariance");
  const Matrix w_inv_v = w_llt.solve(v);

  Vector sum = Vector::Zero(params_.Dim());
  for (const Vector &e : enroll) sum += e - params_.mean;
  const double n = static_cast<double>(enroll.size());
  const Matrix post_precision =
      Matrix::Identity(v.cols(), v.cols()) + n * v.transpose() * w_inv_v;
  const Eigen::LLT<Matrix> p_llt = DenseFactor(post_precision, "speaker posterior");
  const Vector y_mean = p_llt.solve(w_inv_v.transpose() * sum);
  const Matrix y_cov = p_llt.solve(Matrix::Identity(v.cols(), v.cols()));

  const Vector t = test - params_.mean;
  auto log_normal = [](const Vector &x, const Matrix &cov) {
    const Eigen::LLT<Matrix> llt = DenseFactor(cov, "predictive covariance");
    const Matrix l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const Vector w = llt.matrixL().solve(x);
    return -0.5 * (x.size() * kLog2Pi + log_det + w.squaredNorm());
  };
  const double same =
      log_normal(t - v * y_mean, v * y_cov * v.transpose() + within);
  const double prior = log_normal(t, v * v.transpose() + within);
  return same - prior;
}

std::vector<StandardPldaReference::SpeakerPosterior>
StandardPldaReference::SolveSpeakers(const EmbeddingTable &table) const {
  const Matrix &v = params_.speaker_loadings;
  const Matrix &u = params_.channel_loadings;
  const int ry = params_.SpeakerRank(), rx = params_.ChannelRank();
  const Matrix vtd = v.transpose() * params_.precision.asDiagonal();
  const Matrix utd = u.transpose() * params_.precision.asDiagonal();
  const Matrix vdv = vtd * v, udu = utd * u, vdu = vtd * u;

  std::vector<std::vector<int>> members(table.NumSpeakers());
  for (int i = 0; i < table.NumSamples(); ++i)
    members[table.Speaker(i)].push_back(i);

  std::vector<SpeakerPosterior> result(table.NumSpeakers());
  for (int s = 0; s < table.NumSpeakers(); ++s) {
    const auto &idx = members[s];
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index dim = ry + n * rx;
    Matrix precision = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);
    precision.topLeftCorner(ry, ry) =
        Matrix::Identity(ry, ry) + static_cast<double>(n) * vdv;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vector m = table.Sample(idx[k]) - params_.mean;
      const Eigen::Index o = ry + k * rx;
      precision.block(0, o, ry, rx) = vdu;
      precision.block(o, 0, rx, ry) = vdu.transpose();
      precision.block(o, o, rx, rx) = Matrix::Identity(rx, rx) + udu;
      rhs.head(ry) += vtd * m;
      rhs.segment(o, rx) = utd * m;
    }
    const Eigen::LLT<Matrix> llt = DenseFactor(precision, "speaker block precision");
    result[s].mean = llt.solve(rhs);
    result[s].covariance = llt.solve(Matrix::Identity(dim, dim));
    result[s].samples = idx;
  }
  return result;
}

std::vector<ChannelMarginal> StandardPldaReference::SampleChannelPosteriors(
    const EmbeddingTable &table) const {
  const int ry = params_.SpeakerRank(), rx = params_.ChannelRank();
  std::vector<ChannelMarginal> out(table.NumSamples());
  for (const SpeakerPosterior &sp : SolveSpeakers(table)) {
    for (size_t k = 0; k < sp.samples.size(); ++k) {
      const Eigen::Index o = ry + static_cast<Eigen::Index>(k) * rx;
      out[sp.samples[k]] = {sp.mean.segment(o, rx),
                            sp.covariance.block(o, o, rx, rx)};
    }
  }
  return out;
}

ModelParams StandardPldaReference::EmStep(const EmbeddingTable &table) const {
  const int ry = params_.SpeakerRank(), rx = params_.ChannelRank();
  const int d = params_.Dim();
  const int q = rx + ry;
  Matrix scatter = Matrix::Zero(d, d);
  Matrix t = Matrix::Zero(q, d);
  Matrix r = Matrix::Zero(q, q);

  for (const SpeakerPosterior &sp : SolveSpeakers(table)) {
    for (size_t k = 0; k < sp.samples.size(); ++k) {
      const Vector m = table.Sample(sp.samples[k]) - params_.mean;
      const Eigen::Index o = ry + static_cast<Eigen::Index>(k) * rx;
      Vector z(q);
      z << sp.mean.segment(o, rx), sp.mean.head(ry);
      Matrix zz(q, q);
      zz.topLeftCorner(rx, rx) = sp.covariance.block(o, o, rx, rx);
      zz.topRightCorner(rx, ry) = sp.covariance.block(o, 0, rx, ry);
      zz.bottomLeftCorner(ry, rx) = sp.covariance.block(0, o, ry, rx);
      zz.bottomRightCorner(ry, ry) = sp.covariance.topLeftCorner(ry, ry);
      zz += z * z.transpose();
      scatter += m * m.transpose();
      t += z * m.transpose();
      r += zz;
    }
  }

  const Matrix w = DenseFactor(r, "second moment").solve(t).transpose();
  const Vector residual =
      (scatter - w * t).diagonal() / static_cast<double>(table.NumSamples());
  ModelParams next = params_;
  next.channel_loadings = w.leftCols(rx);
  next.speaker_loadings = w.rightCols(ry);
  next.precision = residual.cwiseInverse();
  return next;
}

}  // namespace jplda::oracle
