// tests/simulate-test.cc

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

#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "jplda/simulate.h"
#include "test-util.h"

using namespace jplda;
using jplda::testing::MakeModel;

namespace {

Matrix SampleCovariance(const Matrix &x) {
  const Matrix c = x.colwise() - x.rowwise().mean();
  return c * c.transpose() / static_cast<double>(x.cols());
}

}  // namespace

TEST_CASE("pure noise model has identity covariance") {
  const int d = 2, n = 20000;
  const ModelParams p =
      MakeModel(Matrix::Zero(d, 1), Matrix::Zero(d, 1), Vector::Ones(d));
  SimulationConfig sim;
  sim.num_speakers = n / 4;
  sim.num_channels = 7;
  sim.samples_per_speaker = 4;
  sim.seed = 1;
  const EmbeddingTable t = Simulate(p, sim);
  const Matrix cov = SampleCovariance(t.Samples());
  CHECK(MaxAbs(cov - Matrix::Identity(d, d)) <= 3.0 / std::sqrt(n));
}

TEST_CASE("unique channels reproduce the analytic marginal covariance") {
  const int n = 50000;
  std::mt19937_64 rng(2);
  ModelSpec spec;
  spec.dim = 10;
  spec.speaker_rank = 1;
  spec.channel_rank = 1;
  spec.speaker_scale = 0.3;
  spec.channel_scale = 0.3;
  spec.noise_variance_min = 0.5;
  spec.noise_variance_max = 0.7;
  const ModelParams p = RandomModel(spec, rng);
  SimulationConfig sim;
  sim.num_speakers = n;
  sim.samples_per_speaker = 1;
  sim.policy = ChannelPolicy::kUnique;
  sim.seed = 3;
  const EmbeddingTable t = Simulate(p, sim);
  CHECK(t.NumChannels() == n);
  Matrix analytic = p.speaker_loadings * p.speaker_loadings.transpose() +
                    p.channel_loadings * p.channel_loadings.transpose();
  analytic.diagonal() += p.precision.cwiseInverse();
  CHECK(MaxAbs(SampleCovariance(t.Samples()) - analytic) <= 5.0 / std::sqrt(n));
}

TEST_CASE("simulation is seeded") {
  std::mt19937_64 rng(4);
  const ModelParams p = RandomModel(ModelSpec(), rng);
  SimulationConfig sim;
  sim.seed = 5;
  sim.policy = ChannelPolicy::kRandom;
  const EmbeddingTable a = Simulate(p, sim), b = Simulate(p, sim);
  CHECK(a.Samples() == b.Samples());
  CHECK(a.ChannelLabels() == b.ChannelLabels());
  sim.seed = 6;
  CHECK(Simulate(p, sim).Samples() != a.Samples());
}

TEST_CASE("round robin shares channels across speakers") {
  std::mt19937_64 rng(7);
  const ModelParams p = RandomModel(ModelSpec(), rng);
  SimulationConfig sim;
  sim.num_speakers = 3;
  sim.num_channels = 4;
  sim.samples_per_speaker = 4;
  const EmbeddingTable t = Simulate(p, sim);
  CHECK(t.NumChannels() == 4);
  for (int s = 0; s < 3; ++s) CHECK(t.SpeakerChannels(s).size() == 4);
  CHECK(t.SampleIds()[5] == "spk0001-utt0001");
}

TEST_CASE("random small problems stay in bounds") {
  std::mt19937_64 rng(8);
  const SmallProblemBounds b;
  for (int k = 0; k < 200; ++k) {
    const SmallProblem p = RandomSmallProblem(rng, b);
    CHECK(p.params.Dim() <= b.max_dim);
    CHECK(p.params.SpeakerRank() <= b.max_rank);
    CHECK(p.params.ChannelRank() <= b.max_rank);
    CHECK(p.table.NumSpeakers() <= b.max_speakers);
    CHECK(p.table.NumChannels() <= b.max_channels);
    CHECK(p.table.NumSamples() <= b.max_samples);
  }
}

TEST_CASE("policy names and validation") {
  for (auto policy : {ChannelPolicy::kRoundRobin, ChannelPolicy::kRandom,
                      ChannelPolicy::kUnique})
    CHECK(ParseChannelPolicy(ChannelPolicyName(policy)) == policy);
  CHECK_THROWS_AS(ParseChannelPolicy("sticky"), std::invalid_argument);
  SimulationConfig sim;
  sim.num_speakers = 0;
  CHECK_THROWS_AS(sim.Validate(), std::invalid_argument);
}
