// src/verify.cc

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

#include "jplda/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "jplda/em-trainer.h"
#include "jplda/oracle.h"
#include "jplda/posterior.h"
#include "jplda/scoring.h"
#include "jplda/simulate.h"

namespace jplda {

namespace {

PropertyResult Property(const char *suite, const char *name, double tol) {
  PropertyResult r;
  r.suite = suite;
  r.name = name;
  r.tolerance = tol;
  return r;
}

std::vector<Vector> Columns(const Matrix &m) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < m.cols(); ++i) out.push_back(m.col(i));
  return out;
}

double BlockError(const SufficientStats &a, const SufficientStats &b) {
  return std::max({RelativeError(a.Tx(), b.Tx()), RelativeError(a.Ty(), b.Ty()),
                   RelativeError(a.Rxx(), b.Rxx()),
                   RelativeError(a.Ryx(), b.Ryx()),
                   RelativeError(a.Ryy(), b.Ryy())});
}

// A random model of dimension 2..8 and ranks 1..2, nonzero mean.
ModelParams TrialModel(std::mt19937_64 &rng) {
  ModelSpec spec;
  spec.dim = std::uniform_int_distribution<int>(2, 8)(rng);
  spec.speaker_rank = std::uniform_int_distribution<int>(1, 2)(rng);
  spec.channel_rank = std::uniform_int_distribution<int>(1, 2)(rng);
  spec.mean_scale = 1.0;
  return RandomModel(spec, rng);
}

// One draw from the model with the given latent values.
Vector Draw(const ModelParams &p, const Vector &y, const Vector &x,
            std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Vector m = p.mean + p.speaker_loadings * y + p.channel_loadings * x;
  for (int i = 0; i < p.Dim(); ++i)
    m(i) += normal(rng) / std::sqrt(p.precision(i));
  return m;
}

Vector Latent(int rank, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  Vector v(rank);
  for (int i = 0; i < rank; ++i) v(i) = normal(rng);
  return v;
}

// Enrollment and test drawn with speaker and channel each tied at random.
std::pair<Vector, Vector> DrawPair(const ModelParams &p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(0.5);
  const Vector y1 = Latent(p.SpeakerRank(), rng);
  const Vector x1 = Latent(p.ChannelRank(), rng);
  const Vector y2 = coin(rng) ? y1 : Latent(p.SpeakerRank(), rng);
  const Vector x2 = coin(rng) ? x1 : Latent(p.ChannelRank(), rng);
  Vector e = Draw(p, y1, x1, rng);
  return {std::move(e), Draw(p, y2, x2, rng)};
}

HypothesisPriors RandomPriors(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HypothesisPriors pr;
  pr.same_channel_same_speaker = u(rng);
  pr.diff_channel_same_speaker = 1.0 - pr.same_channel_same_speaker;
  pr.same_channel_diff_speaker = u(rng);
  pr.diff_channel_diff_speaker = 1.0 - pr.same_channel_diff_speaker;
  return pr;
}

HypothesisPriors DiffChannelOnly() { return {0.0, 1.0, 0.0, 1.0}; }

std::vector<PropertyResult> PosteriorSuite(const VerifyOptions &opt) {
  auto mean = Property("posterior", "inner-mean", kOracleTolerance);
  auto cov = Property("posterior", "inner-covariance", kOracleTolerance);
  auto marg = Property("posterior", "channel-marginals", kOracleTolerance);
  auto outer = Property("posterior", "outer-means", kOracleTolerance);
  for (int k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    const SmallProblem p = RandomSmallProblem(rng);
    const PrecisionCache cache = BuildPrecisions(p.params, p.table);
    const InnerPosterior inner = ComputeInnerPosterior(p.params, cache, p.table);
    const OuterPosterior out = ComputeOuterPosterior(cache, p.table, inner);
    const oracle::JointPosterior ref = oracle::OraclePosterior(p.params, p.table);

    mean.Observe(RelativeError(inner.x_hat, ref.ChannelMeans()), seed);
    cov.Observe(RelativeError(inner.sigma, ref.ChannelCovariance()), seed);
    double err = 0.0;
    const int rx = p.params.ChannelRank();
    for (int c = 0; c < p.table.NumChannels(); ++c) {
      const ChannelMarginal m = MarginalChannel(inner, c);
      const Eigen::Index o = ref.ChannelOffset(c);
      err = std::max({err, RelativeError(m.mean, ref.ChannelMean(c)),
                      RelativeError(m.covariance,
                                    ref.covariance.block(o, o, rx, rx))});
    }
    marg.Observe(err, seed);
    err = 0.0;
    for (int s = 0; s < p.table.NumSpeakers(); ++s)
      err = std::max(err, RelativeError(out.y_hat.col(s), ref.SpeakerMean(s)));
    outer.Observe(err, seed);
  }
  return {mean, cov, marg, outer};
}

std::vector<PropertyResult> LikelihoodSuite(const VerifyOptions &opt) {
  auto ll = Property("likelihood", "log-marginal-likelihood", kOracleTolerance);
  for (int k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    const SmallProblem p = RandomSmallProblem(rng);
    const PrecisionCache cache = BuildPrecisions(p.params, p.table);
    const InnerPosterior inner = ComputeInnerPosterior(p.params, cache, p.table);
    const double value = LogMarginalLikelihood(p.params, cache, p.table, inner);
    const std::vector<Vector> samples = Columns(p.table.Samples());
    const double ref = oracle::OracleLogDensity(
        p.params, samples, p.table.SpeakerLabels(), p.table.ChannelLabels());
    ll.Observe(RelativeError(value, ref), seed);
  }
  return {ll};
}

std::vector<PropertyResult> EStepSuite(const VerifyOptions &opt) {
  auto blocks = Property("estep", "T-and-R-blocks", kOracleTolerance);
  auto scatter = Property("estep", "scatter", kOracleTolerance);
  for (int k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    const SmallProblem p = RandomSmallProblem(rng);
    const PrecisionCache cache = BuildPrecisions(p.params, p.table);
    const SufficientStats stats = EStep(p.params, cache, p.table);
    const SufficientStats ref = oracle::OracleMoments(p.params, p.table);
    blocks.Observe(BlockError(stats, ref), seed);
    scatter.Observe(RelativeError(stats.scatter, ref.scatter), seed);
  }
  return {blocks, scatter};
}

std::vector<PropertyResult> EmSuite(const VerifyOptions &opt) {
  auto mono = Property("em", "monotone-likelihood", kMonotonicityTolerance);
  std::mt19937_64 rng(opt.seed);
  ModelSpec spec;
  spec.dim = 8;
  spec.speaker_rank = 3;
  spec.channel_rank = 2;
  spec.mean_scale = 1.0;
  const ModelParams truth = RandomModel(spec, rng);
  SimulationConfig sim;
  sim.num_speakers = 30;
  sim.num_channels = 10;
  sim.samples_per_speaker = 8;
  sim.seed = opt.seed;
  const EmbeddingTable table = Simulate(truth, sim);
  TrainConfig cfg;
  cfg.speaker_rank = spec.speaker_rank;
  cfg.channel_rank = spec.channel_rank;
  cfg.max_iters = opt.em_iterations;
  cfg.rel_tol = 0.0;
  cfg.seed = opt.seed;
  const TrainTrace trace = Train(table, cfg);
  mono.Observe(std::max(0.0, WorstLikelihoodDecrease(trace.log_likelihoods)),
               opt.seed);
  mono.checked = static_cast<int>(trace.log_likelihoods.size());
  return {mono};
}

std::vector<PropertyResult> DegeneracySuite(const VerifyOptions &opt) {
  auto em = Property("degeneracy", "unique-channel-em", kOracleTolerance);
  auto llr = Property("degeneracy", "unique-channel-llr", kOracleTolerance);
  const int em_instances = std::max(1, std::min(opt.instances, 5));
  for (int k = 0; k < em_instances; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    ModelSpec spec;
    spec.dim = 5;
    spec.speaker_rank = 2;
    spec.channel_rank = 2;
    spec.mean_scale = 1.0;
    const ModelParams truth = RandomModel(spec, rng);
    SimulationConfig sim;
    sim.num_speakers = 6;
    sim.samples_per_speaker = 4;
    sim.policy = ChannelPolicy::kUnique;
    sim.seed = seed;
    const EmbeddingTable table = Simulate(truth, sim);

    TrainConfig cfg;
    cfg.speaker_rank = spec.speaker_rank;
    cfg.channel_rank = spec.channel_rank;
    cfg.max_iters = 10;
    cfg.rel_tol = 0.0;
    cfg.seed = seed;
    const ModelParams init = InitParams(table, cfg);
    const ModelParams joint = TrainFrom(table, init, cfg).params;
    ModelParams ref = init;
    for (int it = 0; it < cfg.max_iters; ++it)
      ref = oracle::StandardPldaReference(ref).EmStep(table);
    em.Observe(std::max({RelativeError(joint.speaker_loadings,
                                       ref.speaker_loadings),
                         RelativeError(joint.channel_loadings,
                                       ref.channel_loadings),
                         RelativeError(joint.precision, ref.precision)}),
               seed);
  }
  for (int k = 0; k < opt.trials; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    const ModelParams params = TrialModel(rng);
    const auto [e, t] = DrawPair(params, rng);
    const double value = ScoreTrial(params, DiffChannelOnly(), e, t).llr;
    const double ref = oracle::StandardPldaReference(params).Llr(e, t);
    llr.Observe(RelativeError(value, ref), seed);
  }
  return {em, llr};
}

std::vector<PropertyResult> ScoringSuite(const VerifyOptions &opt) {
  auto single = Property("scoring", "single-trial-llr", kOracleTolerance);
  auto unseen = Property("scoring", "unseen-channel-llr", kOracleTolerance);
  for (int k = 0; k < opt.trials; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    const ModelParams params = TrialModel(rng);
    const HypothesisPriors priors = RandomPriors(rng);
    const auto [e, t] = DrawPair(params, rng);
    single.Observe(RelativeError(ScoreTrial(params, priors, e, t).llr,
                                 oracle::OracleTrialLlr(params, priors, e, t)),
                   seed);

    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    const int channels = std::uniform_int_distribution<int>(1, 3)(rng);
    std::uniform_int_distribution<int> pick(0, channels - 1);
    const Vector y = Latent(params.SpeakerRank(), rng);
    std::vector<Vector> x;
    for (int c = 0; c < channels; ++c) x.push_back(Latent(params.ChannelRank(), rng));
    std::vector<EnrollmentSample> enroll;
    for (int i = 0; i < n; ++i) {
      const int c = pick(rng);
      enroll.push_back({Draw(params, y, x[c], rng), c});
    }
    const bool target = std::bernoulli_distribution(0.5)(rng);
    const Vector test = Draw(params, target ? y : Latent(params.SpeakerRank(), rng),
                             Latent(params.ChannelRank(), rng), rng);
    unseen.Observe(
        RelativeError(ScoreUnseenChannel(params, enroll, test).llr,
                      oracle::OracleUnseenChannelLlr(params, enroll, test)),
        seed);
  }
  return {single, unseen};
}

std::vector<PropertyResult> ConsistencySuite(const VerifyOptions &opt) {
  auto cross = Property("consistency", "unseen-vs-single", kConsistencyTolerance);
  auto sym = Property("consistency", "symmetry", kConsistencyTolerance);
  auto collapse = Property("consistency", "zero-channel-collapse", 0.0);
  for (int k = 0; k < opt.trials; ++k) {
    const std::uint64_t seed = opt.seed + k;
    std::mt19937_64 rng(seed);
    ModelParams params = TrialModel(rng);
    const HypothesisPriors priors = RandomPriors(rng);
    const auto [e, t] = DrawPair(params, rng);
    const EnrollmentSample enroll[] = {{e, 0}};
    cross.Observe(RelativeError(ScoreUnseenChannel(params, enroll, t).llr,
                                ScoreTrial(params, DiffChannelOnly(), e, t).llr),
                  seed);
    const TrialScorer scorer(params, priors);
    sym.Observe(RelativeError(scorer.Score(e, t).llr, scorer.Score(t, e).llr),
                seed);
    params.channel_loadings.setZero();
    collapse.Observe(std::abs(ScoreTrial(params, priors, e, t).llr_inner), seed);
  }
  return {cross, sym, collapse};
}

}  // namespace

void PropertyResult::Observe(double error, std::uint64_t seed) {
  ++checked;
  if (std::isnan(error) || error > tolerance) {
    if (passed) failing_seed = seed;
    passed = false;
  }
  if (std::isnan(error) || error > max_error) max_error = error;
}

const std::vector<std::string> &VerifySuiteNames() {
  static const std::vector<std::string> names = {
      "posterior", "likelihood", "estep", "em",
      "degeneracy", "scoring", "consistency"};
  return names;
}

std::vector<PropertyResult> RunVerifySuite(const std::string &suite,
                                           const VerifyOptions &options) {
  if (options.instances < 1 || options.trials < 1 || options.em_iterations < 2)
    throw std::invalid_argument("verify sizes must be positive");
  if (suite == "posterior") return PosteriorSuite(options);
  if (suite == "likelihood") return LikelihoodSuite(options);
  if (suite == "estep") return EStepSuite(options);
  if (suite == "em") return EmSuite(options);
  if (suite == "degeneracy") return DegeneracySuite(options);
  if (suite == "scoring") return ScoringSuite(options);
  if (suite == "consistency") return ConsistencySuite(options);
  throw std::invalid_argument("unknown verify suite '" + suite + "'");
}

double WorstLikelihoodDecrease(std::span<const double> ll) {
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < ll.size(); ++k)
    worst = std::max(worst, (ll[k - 1] - ll[k]) / std::abs(ll[k - 1]));
  return ll.size() < 2 ? 0.0 : worst;
}

void PrintPropertyResult(std::ostream &os, const PropertyResult &r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %s/%s n=%d max_err=%.3g tol=%.3g",
                r.passed ? "PASS" : "FAIL", r.suite.c_str(), r.name.c_str(),
                r.checked, r.max_error, r.tolerance);
  os << buf;
  if (r.failing_seed) os << " failing_seed=" << *r.failing_seed;
  os << '\n';
}

}  // namespace jplda
