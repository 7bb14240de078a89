// include/jplda/simulate.h

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

#ifndef JPLDA_SIMULATE_H_
#define JPLDA_SIMULATE_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "jplda/embedding-table.h"
#include "jplda/model.h"

namespace jplda {

/// How simulated samples are assigned to channels.
///   round-robin: global sample k goes to channel k mod C, so speakers share
///                channels;
///   random:      uniform channel per sample;
///   unique:      every sample gets its own channel (C = N).
enum class ChannelPolicy { kRoundRobin, kRandom, kUnique };

/// Accepts "round-robin", "random" and "unique".
ChannelPolicy ParseChannelPolicy(std::string_view name);
std::string ChannelPolicyName(ChannelPolicy policy);

struct ModelSpec {
  int dim = 10;
  int speaker_rank = 2;
  int channel_rank = 2;
  double speaker_scale = 1.0;  // std of loading entries
  double channel_scale = 1.0;
  double noise_variance_min = 0.5;
  double noise_variance_max = 1.5;
  double mean_scale = 0.0;  // std of mean entries
};

/// Random parameters: Gaussian loadings, uniform noise variances.
ModelParams RandomModel(const ModelSpec &spec, std::mt19937_64 &rng);

struct SimulationConfig {
  int num_speakers = 10;
  int num_channels = 5;
  int samples_per_speaker = 4;
  ChannelPolicy policy = ChannelPolicy::kRoundRobin;
  std::uint64_t seed = 0;
  std::string name_prefix;  // prepended to sample, speaker and channel names

  void Validate() const;
};

/// Draws y_s, x_c and per-sample noise from the model. Channels that end
/// up unused are dropped, so labels stay contiguous.
EmbeddingTable Simulate(const ModelParams &params,
                        const SimulationConfig &config);

struct SmallProblem {
  ModelParams params;
  EmbeddingTable table;
};

struct SmallProblemBounds {
  int max_dim = 6;
  int max_speakers = 4;
  int max_channels = 3;
  int max_rank = 2;
  int max_samples = 12;
};

/// A random model and a data set drawn from it, sized within `bounds`, with
/// every speaker and channel used at least once.
SmallProblem RandomSmallProblem(std::mt19937_64 &rng,
                                const SmallProblemBounds &bounds = {});

}  // namespace jplda

#endif  // JPLDA_SIMULATE_H_
