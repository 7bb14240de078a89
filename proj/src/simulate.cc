// src/simulate.cc

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

#include "jplda/simulate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace jplda {

namespace {

Matrix Gaussian(Eigen::Index rows, Eigen::Index cols, double scale,
                std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = scale * normal(rng);
  return m;
}

std::string Name(const std::string &prefix, const char *kind, int id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", kind, id);
  return prefix + buf;
}

int Uniform(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

ChannelPolicy ParseChannelPolicy(std::string_view name) {
  if (name == "round-robin") return ChannelPolicy::kRoundRobin;
  if (name == "random") return ChannelPolicy::kRandom;
  if (name == "unique") return ChannelPolicy::kUnique;
  throw std::invalid_argument("unknown channel policy '" + std::string(name) +
                              "'");
}

std::string ChannelPolicyName(ChannelPolicy policy) {
  switch (policy) {
    case ChannelPolicy::kRoundRobin: return "round-robin";
    case ChannelPolicy::kRandom: return "random";
    case ChannelPolicy::kUnique: return "unique";
  }
  return "unknown";
}

ModelParams RandomModel(const ModelSpec &spec, std::mt19937_64 &rng) {
  if (spec.dim < 1 || spec.speaker_rank < 1 || spec.channel_rank < 1 ||
      spec.speaker_rank > spec.dim || spec.channel_rank > spec.dim)
    throw std::invalid_argument("model spec sizes are invalid");
  if (!(spec.noise_variance_min > 0.0) ||
      spec.noise_variance_max < spec.noise_variance_min)
    throw std::invalid_argument("noise variance range is invalid");
  ModelParams params;
  params.speaker_loadings =
      Gaussian(spec.dim, spec.speaker_rank, spec.speaker_scale, rng);
  params.channel_loadings =
      Gaussian(spec.dim, spec.channel_rank, spec.channel_scale, rng);
  std::uniform_real_distribution<double> var(spec.noise_variance_min,
                                             spec.noise_variance_max);
  params.precision.resize(spec.dim);
  for (int i = 0; i < spec.dim; ++i) params.precision(i) = 1.0 / var(rng);
  params.mean = Gaussian(spec.dim, 1, spec.mean_scale, rng);
  return params;
}

void SimulationConfig::Validate() const {
  if (num_speakers < 1 || samples_per_speaker < 1)
    throw std::invalid_argument("speaker and sample counts must be >= 1");
  if (policy != ChannelPolicy::kUnique && num_channels < 1)
    throw std::invalid_argument("channel count must be >= 1");
}

EmbeddingTable Simulate(const ModelParams &params,
                        const SimulationConfig &config) {
  params.Validate();
  config.Validate();
  const int d = params.Dim();
  const int n = config.num_speakers * config.samples_per_speaker;
  const int num_channels =
      config.policy == ChannelPolicy::kUnique ? n : config.num_channels;

  std::mt19937_64 rng(config.seed);
  const Matrix y = Gaussian(params.SpeakerRank(), config.num_speakers, 1.0, rng);
  const Matrix x = Gaussian(params.ChannelRank(), num_channels, 1.0, rng);
  const Vector noise_std = params.precision.cwiseInverse().cwiseSqrt();
  const Matrix speaker_part = params.speaker_loadings * y;
  const Matrix channel_part = params.channel_loadings * x;

  std::vector<RawRow> rows;
  rows.reserve(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, num_channels - 1);
  for (int s = 0, k = 0; s < config.num_speakers; ++s) {
    for (int j = 0; j < config.samples_per_speaker; ++j, ++k) {
      int c = 0;
      switch (config.policy) {
        case ChannelPolicy::kRoundRobin: c = k % num_channels; break;
        case ChannelPolicy::kRandom: c = pick(rng); break;
        case ChannelPolicy::kUnique: c = k; break;
      }
      Vector m = params.mean + speaker_part.col(s) + channel_part.col(c);
      for (int i = 0; i < d; ++i) m(i) += noise_std(i) * normal(rng);
      rows.push_back({Name(config.name_prefix, "spk", s) + "-" +
                          Name("", "utt", j),
                      Name(config.name_prefix, "spk", s),
                      Name(config.name_prefix, "ch", c), std::move(m)});
    }
  }
  return Ingest(rows);
}

SmallProblem RandomSmallProblem(std::mt19937_64 &rng,
                                const SmallProblemBounds &bounds) {
  ModelSpec spec;
  spec.dim = Uniform(rng, std::min(2, bounds.max_dim), bounds.max_dim);
  spec.speaker_rank = Uniform(rng, 1, std::min(bounds.max_rank, spec.dim));
  spec.channel_rank = Uniform(rng, 1, std::min(bounds.max_rank, spec.dim));
  spec.mean_scale = 1.0;
  ModelParams params = RandomModel(spec, rng);

  const int num_speakers = Uniform(rng, 1, bounds.max_speakers);
  const int num_channels = Uniform(rng, 1, bounds.max_channels);
  const int n = Uniform(rng, std::max(num_speakers, num_channels),
                        bounds.max_samples);
  std::vector<int> speakers(n), channels(n);
  for (int i = 0; i < n; ++i) {
    speakers[i] = i < num_speakers ? i : Uniform(rng, 0, num_speakers - 1);
    channels[i] = i < num_channels ? i : Uniform(rng, 0, num_channels - 1);
  }
  std::shuffle(channels.begin(), channels.end(), rng);

  const Matrix y = Gaussian(spec.speaker_rank, num_speakers, 1.0, rng);
  const Matrix x = Gaussian(spec.channel_rank, num_channels, 1.0, rng);
  Matrix samples(spec.dim, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    samples.col(i) = params.mean + params.speaker_loadings * y.col(speakers[i]) +
                     params.channel_loadings * x.col(channels[i]);
    for (int k = 0; k < spec.dim; ++k)
      samples(k, i) += normal(rng) / std::sqrt(params.precision(k));
  }
  return {std::move(params),
          EmbeddingTable::FromLabels(std::move(samples), std::move(speakers),
                                     std::move(channels))};
}

}  // namespace jplda
