// tests/em-trainer-test.cc

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

#include "jplda/em-trainer.h"
#include "jplda/errors.h"
#include "jplda/oracle.h"
#include "jplda/simulate.h"
#include "jplda/verify.h"
#include "test-util.h"

using namespace jplda;
using jplda::testing::Col;
using jplda::testing::MakeModel;
using jplda::testing::RandomMatrix;
using jplda::testing::Vec;

namespace {

EmbeddingTable Simulated(int dim, int ry, int rx, std::uint64_t seed,
                         ModelParams *truth = nullptr) {
  std::mt19937_64 rng(seed);
  ModelSpec spec;
  spec.dim = dim;
  spec.speaker_rank = ry;
  spec.channel_rank = rx;
  spec.mean_scale = 1.0;
  const ModelParams p = RandomModel(spec, rng);
  if (truth) *truth = p;
  SimulationConfig sim;
  sim.num_speakers = 20;
  sim.num_channels = 6;
  sim.samples_per_speaker = 5;
  sim.seed = seed;
  return Simulate(p, sim);
}

double LogLikelihood(const ModelParams &p, const EmbeddingTable &t) {
  const PrecisionCache cache = BuildPrecisions(p, t);
  return LogMarginalLikelihood(p, cache, t, ComputeInnerPosterior(p, cache, t));
}

bool Identical(const ModelParams &a, const ModelParams &b) {
  return a.speaker_loadings == b.speaker_loadings &&
         a.channel_loadings == b.channel_loadings &&
         a.precision == b.precision && a.mean == b.mean;
}

}  // namespace

TEST_CASE("init is deterministic and bounded") {
  const EmbeddingTable t = Simulated(4, 2, 2, 1);
  TrainConfig cfg;
  cfg.speaker_rank = 2;
  cfg.channel_rank = 1;
  cfg.seed = 42;
  CHECK(Identical(InitParams(t, cfg), InitParams(t, cfg)));
  cfg.seed = 43;
  const ModelParams other = InitParams(t, cfg);
  CHECK(other.mean == t.Mean());

  cfg.speaker_rank = 4;
  cfg.channel_rank = 4;
  CHECK_NOTHROW(InitParams(t, cfg));
  cfg.speaker_rank = 5;
  CHECK_THROWS_AS(InitParams(t, cfg), std::invalid_argument);
}

TEST_CASE("init precision of white data") {
  std::mt19937_64 rng(2);
  const int n = 20000;
  const Matrix samples = RandomMatrix(4, n, rng);
  std::vector<int> spk(n), chn(n);
  for (int i = 0; i < n; ++i) {
    spk[i] = i % 100;
    chn[i] = i % 7;
  }
  const EmbeddingTable t = EmbeddingTable::FromLabels(samples, spk, chn);
  TrainConfig cfg;
  // Variance estimator std is sqrt(2/N) = 0.01; allow five of them.
  const ModelParams p = InitParams(t, cfg);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(p.precision(i) - 1.0) <= 0.05);
}

TEST_CASE("init clamps zero-variance dimensions") {
  Matrix samples = Matrix::Zero(2, 4);
  samples.row(0) << 1, 2, 3, 4;
  const EmbeddingTable t =
      EmbeddingTable::FromLabels(samples, {0, 0, 1, 1}, {0, 1, 0, 1});
  std::vector<int> clamped;
  const ModelParams p = InitParams(t, TrainConfig(), &clamped);
  CHECK(clamped == std::vector<int>{1});
  CHECK(p.precision(1) == 1e8);
}

TEST_CASE("log likelihood of one standard normal sample at zero") {
  const int d = 3;
  const ModelParams p =
      MakeModel(Matrix::Zero(d, 1), Matrix::Zero(d, 1), Vector::Ones(d));
  const EmbeddingTable t =
      EmbeddingTable::FromLabels(Matrix::Zero(d, 1), {0}, {0});
  CHECK(LogLikelihood(p, t) ==
        doctest::Approx(-0.5 * d * std::log(2 * M_PI)).epsilon(1e-14));
}

TEST_CASE("log likelihood with duplicated samples in fresh channels") {
  std::mt19937_64 rng(3);
  const SmallProblem base = RandomSmallProblem(rng);
  const EmbeddingTable &t = base.table;
  const int n = t.NumSamples();
  Matrix samples(t.Dim(), 2 * n);
  samples << t.Samples(), t.Samples();
  std::vector<int> spk = t.SpeakerLabels(), chn = t.ChannelLabels();
  for (int i = 0; i < n; ++i) {
    spk.push_back(t.Speaker(i));
    chn.push_back(t.NumChannels() + i);
  }
  const EmbeddingTable doubled = EmbeddingTable::FromLabels(samples, spk, chn);
  std::vector<Vector> cols;
  for (int i = 0; i < 2 * n; ++i) cols.push_back(samples.col(i));
  if (2 * n * t.Dim() <= oracle::kMaxOracleStackedDim) {
    const double ref = oracle::OracleLogDensity(base.params, cols, spk, chn);
    CHECK(RelativeError(LogLikelihood(base.params, doubled), ref) <= 1e-8);
  }
}

TEST_CASE("E-step without a channel subspace") {
  std::mt19937_64 rng(4);
  const ModelParams p = MakeModel(RandomMatrix(3, 2, rng), Matrix::Zero(3, 1),
                                  Vec({1, 2, 3}));
  const EmbeddingTable t = EmbeddingTable::FromLabels(
      RandomMatrix(3, 5, rng), {0, 0, 1, 1, 1}, {0, 1, 1, 2, 2});
  const PrecisionCache cache = BuildPrecisions(p, t);
  const SufficientStats st = EStep(p, cache, t);
  CHECK(st.Tx().isZero(0.0));
  CHECK(st.Ryx().isZero(0.0));
  CHECK(RelativeError(st.Rxx(), 5.0 * Matrix::Identity(1, 1)) <= 1e-14);
  // The speaker block reduces to speaker-only PLDA statistics.
  const SufficientStats ref = oracle::OracleMoments(p, t);
  CHECK(RelativeError(st.Ty(), ref.Ty()) <= 1e-10);
  CHECK(RelativeError(st.Ryy(), ref.Ryy()) <= 1e-10);
}

TEST_CASE("E-step of one sample matches closed-form moments") {
  const double v = 0.6, u = 1.1, dp = 0.7, m = -2.3;
  const ModelParams p = MakeModel(Col({v}), Col({u}), Vec({dp}));
  const EmbeddingTable t =
      EmbeddingTable::FromLabels(Matrix::Constant(1, 1, m), {0}, {0});
  const SufficientStats st = EStep(p, BuildPrecisions(p, t), t);
  // Latent [x; y], precision P = I + D w w' with w = (u, v).
  Matrix prec(2, 2);
  prec << 1 + dp * u * u, dp * u * v, dp * u * v, 1 + dp * v * v;
  const Matrix cov = prec.inverse();
  const Vector z = cov * (dp * m * Vec({u, v}));
  CHECK(RelativeError(st.first_moment, z * m) <= 1e-10);
  CHECK(RelativeError(st.second_moment, cov + z * z.transpose()) <= 1e-10);
  CHECK(st.scatter(0, 0) == m * m);
  CHECK(st.num_samples == 1);
}

TEST_CASE("E-step statistics are symmetric") {
  const EmbeddingTable t = Simulated(6, 2, 2, 5);
  TrainConfig cfg;
  cfg.speaker_rank = 2;
  cfg.channel_rank = 2;
  const ModelParams p = InitParams(t, cfg);
  const SufficientStats st = EStep(p, BuildPrecisions(p, t), t);
  const double r = MaxAbs(st.second_moment);
  CHECK(MaxAbs(st.second_moment - st.second_moment.transpose()) <= 1e-10 * r);
  CHECK(MaxAbs(st.scatter - st.scatter.transpose()) <= 1e-10 * MaxAbs(st.scatter));
}

TEST_CASE("M-step recovers the parameters its statistics were built from") {
  std::mt19937_64 rng(6);
  const int d = 5, rx = 2, ry = 2, q = rx + ry;
  const std::int64_t n = 300;
  Matrix w = RandomMatrix(d, q, rng);
  SUBCASE("general loadings") {}
  SUBCASE("no channel subspace, orthonormal speaker loadings") {
    w.leftCols(rx).setZero();
    w.rightCols(ry) = Eigen::HouseholderQR<Matrix>(RandomMatrix(d, ry, rng))
                          .householderQ() *
                      Matrix::Identity(d, ry);
  }
  const Vector precision = Vec({0.5, 1, 2, 4, 1.5});
  const Matrix a = RandomMatrix(q, q, rng);
  SufficientStats st;
  st.second_moment = a * a.transpose() + static_cast<double>(n) * Matrix::Identity(q, q);
  st.first_moment = st.second_moment * w.transpose();
  st.scatter = w * st.first_moment;
  st.scatter.diagonal() += static_cast<double>(n) * precision.cwiseInverse();
  st.num_samples = n;
  st.channel_rank = rx;
  st.speaker_rank = ry;

  const ModelUpdate up = MStep(st);
  Matrix w_new(d, q);
  w_new << up.channel_loadings, up.speaker_loadings;
  CHECK(RelativeError(w_new, w) <= 1e-10);
  CHECK(RelativeError(up.precision, precision) <= 1e-10);
  CHECK(RelativeError(st.second_moment * w_new.transpose(), st.first_moment) <=
        1e-10);
}

TEST_CASE("M-step rejects a non-positive noise estimate") {
  SufficientStats st;
  st.second_moment = Matrix::Identity(2, 2);
  st.first_moment = Matrix::Identity(2, 1) * 2.0;
  st.scatter = Matrix::Constant(1, 1, 1.0);  // S - W T = 1 - 4 < 0
  st.num_samples = 1;
  st.channel_rank = 1;
  st.speaker_rank = 1;
  CHECK_THROWS_AS(MStep(st), NumericalError);
}

TEST_CASE("converged run is a fixed point") {
  const EmbeddingTable t = Simulated(4, 1, 1, 7);
  TrainConfig cfg;
  cfg.max_iters = 5000;
  cfg.rel_tol = 1e-14;
  const TrainTrace trace = Train(t, cfg);
  REQUIRE(trace.stop_reason == StopReason::kConverged);
  const ModelParams &p = trace.params;
  const ModelUpdate up = MStep(EStep(p, BuildPrecisions(p, t), t));
  CHECK(MaxAbs(up.speaker_loadings - p.speaker_loadings) <= 1e-6);
  CHECK(MaxAbs(up.channel_loadings - p.channel_loadings) <= 1e-6);
  CHECK(MaxAbs(up.precision - p.precision) <= 1e-6);
}

TEST_CASE("train loop bounds, determinism and monotonicity") {
  const EmbeddingTable t = Simulated(6, 2, 2, 8);
  TrainConfig cfg;
  cfg.speaker_rank = 2;
  cfg.channel_rank = 2;
  cfg.max_iters = 1;
  const TrainTrace one = Train(t, cfg);
  CHECK(one.log_likelihoods.size() == 1);
  CHECK(one.iterations == 1);

  cfg.max_iters = 40;
  cfg.rel_tol = 0.0;
  const TrainTrace a = Train(t, cfg), b = Train(t, cfg);
  CHECK(a.log_likelihoods == b.log_likelihoods);
  CHECK(Identical(a.params, b.params));
  CHECK(a.iterations == 40);
  CHECK(WorstLikelihoodDecrease(a.log_likelihoods) <= 1e-9);

  int calls = 0;
  Train(t, cfg, [&](int iter, double ll, double) {
    CHECK(ll == a.log_likelihoods[iter]);
    ++calls;
  });
  CHECK(calls == 40);
}

TEST_CASE("train annotates failures with the iteration") {
  const EmbeddingTable t = Simulated(6, 2, 2, 9);
  TrainConfig cfg;
  cfg.inner.max_dense_dim = 2;
  try {
    Train(t, cfg);
    FAIL("expected CapacityError");
  } catch (const CapacityError &e) {
    CHECK(std::string(e.what()).find("EM iteration 0") != std::string::npos);
  }
  cfg = TrainConfig();
  cfg.max_iters = 0;
  CHECK_THROWS_AS(Train(t, cfg), std::invalid_argument);
}
