// tools/jplda.cc

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

// jplda: train, score, simulate and verify Joint PLDA models.
//
// Exit codes: 0 success, 1 verification failure, 2 input or I/O error,
// 3 numerical failure, 64 usage error.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "jplda/em-trainer.h"
#include "jplda/errors.h"
#include "jplda/io.h"
#include "jplda/scoring.h"
#include "jplda/simulate.h"
#include "jplda/verify.h"

namespace {

using namespace jplda;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to a file, or to stdout for "-".
class Output {
 public:
  explicit Output(const std::string &path) : path_(path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream &Stream() { return file_ ? *file_ : std::cout; }
  void Close() {
    Stream().flush();
    if (!Stream()) throw IoError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

HypothesisPriors ParsePriors(const std::string &text) {
  double p[4];
  const char *pos = text.data(), *end = text.data() + text.size();
  for (int k = 0; k < 4; ++k) {
    auto [ptr, ec] = std::from_chars(pos, end, p[k]);
    if (ec != std::errc() || (k < 3 && (ptr == end || *ptr != ',')))
      throw UsageError("--priors expects pss,pds,psd,pdd, got '" + text + "'");
    pos = k < 3 ? ptr + 1 : ptr;
  }
  if (pos != end)
    throw UsageError("--priors expects four values, got '" + text + "'");
  HypothesisPriors priors{p[0], p[1], p[2], p[3]};
  try {
    priors.Validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(std::string("--priors: ") + e.what());
  }
  return priors;
}

void WritePriorsHeader(std::ostream &os, const HypothesisPriors &p) {
  os << "# priors pss=" << FormatRoundTrip(p.same_channel_same_speaker)
     << " pds=" << FormatRoundTrip(p.diff_channel_same_speaker)
     << " psd=" << FormatRoundTrip(p.same_channel_diff_speaker)
     << " pdd=" << FormatRoundTrip(p.diff_channel_diff_speaker) << '\n';
}

std::string TrialWhere(const std::string &path, const Trial &t) {
  return path + ":" + std::to_string(t.line) + ": ";
}

// ---- train

struct TrainArgs {
  std::string data, out, log;
  int ry = 0, rx = 0, max_iters = 200;
  std::uint64_t seed = 0;
  double rel_tol = 1e-6;
  std::int64_t max_dense_dim = InnerPosteriorOptions().max_dense_dim;
};

int RunTrain(const TrainArgs &a) {
  const EmbeddingTable table = ReadEmbeddings(a.data);
  TrainConfig cfg;
  cfg.speaker_rank = a.ry;
  cfg.channel_rank = a.rx;
  cfg.max_iters = a.max_iters;
  cfg.rel_tol = a.rel_tol;
  cfg.seed = a.seed;
  cfg.inner.max_dense_dim = a.max_dense_dim;
  if (a.ry > table.Dim() || a.rx > table.Dim())
    throw UsageError("--ry and --rx must not exceed the embedding dimension " +
                     std::to_string(table.Dim()));

  std::unique_ptr<Output> log;
  if (!a.log.empty()) log = std::make_unique<Output>(a.log);
  std::ostream &los = log ? log->Stream() : std::cerr;
  const TrainTrace trace =
      Train(table, cfg, [&los](int iter, double ll, double delta) {
        los << iter << '\t' << FormatScore(ll) << '\t' << FormatScore(delta)
            << '\n';
      });
  if (log) log->Close();
  WriteModelFile(trace.params, a.out);
  std::cerr << "jplda train: " << trace.iterations << " iterations, "
            << (trace.stop_reason == StopReason::kConverged ? "converged"
                                                            : "iteration limit")
            << ", final log-likelihood " << FormatScore(trace.log_likelihoods.back())
            << '\n';
  return 0;
}

// ---- score

struct ScoreArgs {
  std::string model, enroll, test, trials, out = "-", priors;
};

int RunScore(const ScoreArgs &a) {
  const HypothesisPriors priors =
      a.priors.empty() ? HypothesisPriors() : ParsePriors(a.priors);
  const ModelParams params = ReadModelFile(a.model);
  const EmbeddingTable enroll = ReadEmbeddings(a.enroll);
  const EmbeddingTable test = ReadEmbeddings(a.test);
  const std::vector<Trial> trials = ReadTrialsFile(a.trials);
  std::vector<TrialScore> scores;
  try {
    scores = ScoreTrialList(params, priors, enroll, test, trials);
  } catch (const InputError &e) {
    throw InputError(a.trials + ": " + e.what());
  }
  Output out(a.out);
  WritePriorsHeader(out.Stream(), priors);
  WriteScores(out.Stream(), trials, scores);
  out.Close();
  return 0;
}

// ---- score-unseen

struct ScoreUnseenArgs {
  std::string model, enroll, test, trials, out = "-";
};

int RunScoreUnseen(const ScoreUnseenArgs &a) {
  const ModelParams params = ReadModelFile(a.model);
  std::unordered_map<std::string, std::vector<EnrollmentSample>> speakers;
  std::unordered_map<std::string, int> channel_ids;
  for (const RawRow &row : ReadEmbeddingRows(a.enroll)) {
    const int c = channel_ids.try_emplace(row.channel, channel_ids.size())
                      .first->second;
    speakers[row.speaker].push_back({row.features, c});
  }
  std::unordered_map<std::string, Vector> tests;
  for (RawRow &row : ReadEmbeddingRows(a.test)) {
    if (!tests.emplace(row.sample_id, std::move(row.features)).second)
      throw InputError(a.test + ": duplicate sample id '" + row.sample_id + "'");
  }

  const std::vector<Trial> trials = ReadTrialsFile(a.trials);
  std::vector<TrialScore> scores;
  scores.reserve(trials.size());
  for (const Trial &t : trials) {
    auto spk = speakers.find(t.enroll_id);
    if (spk == speakers.end())
      throw InputError(TrialWhere(a.trials, t) + "unknown enrollment speaker '" +
                       t.enroll_id + "'");
    auto tst = tests.find(t.test_id);
    if (tst == tests.end())
      throw InputError(TrialWhere(a.trials, t) + "unknown test id '" +
                       t.test_id + "'");
    scores.push_back(ScoreUnseenChannel(params, spk->second, tst->second));
  }
  Output out(a.out);
  WriteScores(out.Stream(), trials, scores);
  out.Close();
  return 0;
}

// ---- simulate

struct SimulateArgs {
  int dim = 10, speakers = 10, channels = 5, per_speaker = 4, ry = 2, rx = 2;
  std::string policy = "round-robin", out, model_out, model;
  std::uint64_t seed = 0;
  bool binary = false;
  double speaker_scale = 1.0, channel_scale = 1.0, mean_scale = 0.0;
};

int RunSimulate(const SimulateArgs &a) {
  SimulationConfig sim;
  sim.num_speakers = a.speakers;
  sim.num_channels = a.channels;
  sim.samples_per_speaker = a.per_speaker;
  try {
    sim.policy = ParseChannelPolicy(a.policy);
  } catch (const std::invalid_argument &e) {
    throw UsageError(std::string("--policy: ") + e.what());
  }

  std::mt19937_64 rng(a.seed);
  ModelParams params;
  if (!a.model.empty()) {
    params = ReadModelFile(a.model);
  } else {
    if (a.ry > a.dim || a.rx > a.dim)
      throw UsageError("--ry and --rx must not exceed --dim");
    ModelSpec spec;
    spec.dim = a.dim;
    spec.speaker_rank = a.ry;
    spec.channel_rank = a.rx;
    spec.speaker_scale = a.speaker_scale;
    spec.channel_scale = a.channel_scale;
    spec.mean_scale = a.mean_scale;
    params = RandomModel(spec, rng);
  }
  sim.seed = rng();
  WriteEmbeddings(Simulate(params, sim), a.out, a.binary);
  if (!a.model_out.empty()) WriteModelFile(params, a.model_out);
  return 0;
}

// ---- verify

struct VerifyArgs {
  VerifyOptions options;
  std::vector<std::string> suites;
};

int RunVerify(const VerifyArgs &a) {
  const std::vector<std::string> &suites =
      a.suites.empty() ? VerifySuiteNames() : a.suites;
  std::cout << "verify seed=" << a.options.seed
            << " instances=" << a.options.instances
            << " trials=" << a.options.trials
            << " em_iterations=" << a.options.em_iterations << '\n';
  int total = 0, failed = 0;
  for (const std::string &suite : suites) {
    for (const PropertyResult &r : RunVerifySuite(suite, a.options)) {
      PrintPropertyResult(std::cout, r);
      ++total;
      if (!r.passed) ++failed;
    }
  }
  if (failed > 0) {
    std::cout << failed << " of " << total << " properties failed\n";
    return kExitVerifyFailed;
  }
  std::cout << "all " << total << " properties passed\n";
  return 0;
}

// ---- eval

struct EvalArgs {
  std::string scores, trials;
};

int RunEval(const EvalArgs &a) {
  std::ifstream is(a.scores);
  if (!is) throw IoError("cannot open '" + a.scores + "' for reading");
  std::vector<ScoredTrial> scored = ParseScores(is, a.scores);
  if (!a.trials.empty()) {
    const std::vector<Trial> trials = ReadTrialsFile(a.trials);
    if (trials.size() != scored.size())
      throw InputError(a.trials + ": " + std::to_string(trials.size()) +
                       " trials but " + std::to_string(scored.size()) +
                       " scores");
    for (size_t k = 0; k < trials.size(); ++k) {
      if (trials[k].enroll_id != scored[k].enroll_id ||
          trials[k].test_id != scored[k].test_id)
        throw InputError(TrialWhere(a.trials, trials[k]) +
                         "trial does not match score row " +
                         std::to_string(k + 1));
      if (!trials[k].target)
        throw InputError(TrialWhere(a.trials, trials[k]) + "trial has no key");
      scored[k].target = trials[k].target;
    }
  }
  std::vector<double> targets, nontargets;
  for (const ScoredTrial &s : scored) {
    if (!s.target)
      throw InputError(a.scores + ": score for " + s.enroll_id + " / " +
                       s.test_id + " has no key; pass --trials");
    (*s.target ? targets : nontargets).push_back(s.llr);
  }
  const double eer = ComputeEer(targets, nontargets);
  std::cout << "eer\t" << FormatRoundTrip(eer) << "\ntargets\t" << targets.size()
            << "\nnontargets\t" << nontargets.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Joint PLDA training, scoring and verification"};
  app.require_subcommand(1);
  app.fallthrough(false);

  TrainArgs train;
  CLI::App *train_cmd = app.add_subcommand("train", "Train a model with EM");
  train_cmd->add_option("--data", train.data, "Embedding file")->required();
  train_cmd->add_option("--ry", train.ry, "Speaker subspace rank")
      ->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--rx", train.rx, "Channel subspace rank")
      ->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Initialization seed");
  train_cmd->add_option("--out", train.out, "Model file")->required();
  train_cmd->add_option("--log", train.log,
                        "Per-iteration log (default stderr)");
  train_cmd->add_option("--max-iters", train.max_iters, "EM iteration limit")
      ->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--rel-tol", train.rel_tol,
                        "Stop when |delta LL| < rel-tol |LL|; 0 disables")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--max-dense-dim", train.max_dense_dim,
                        "Largest channel posterior solved densely")
      ->capture_default_str()->check(CLI::PositiveNumber);

  ScoreArgs score;
  CLI::App *score_cmd =
      app.add_subcommand("score", "Score single-enrollment trials");
  score_cmd->add_option("--model", score.model, "Model file")->required();
  score_cmd->add_option("--enroll", score.enroll, "Enrollment embeddings")
      ->required();
  score_cmd->add_option("--test", score.test, "Test embeddings")->required();
  score_cmd->add_option("--trials", score.trials, "Trial list")->required();
  score_cmd->add_option("--out", score.out, "Score file, - for stdout")
      ->capture_default_str();
  score_cmd->add_option("--priors", score.priors,
                        "pss,pds,psd,pdd (default 0.5,0.5,0.5,0.5)");

  ScoreUnseenArgs unseen;
  CLI::App *unseen_cmd = app.add_subcommand(
      "score-unseen", "Score speaker enrollments against unseen-channel tests");
  unseen_cmd->add_option("--model", unseen.model, "Model file")->required();
  unseen_cmd->add_option("--enroll", unseen.enroll,
                         "Enrollment embeddings, grouped by speaker label")
      ->required();
  unseen_cmd->add_option("--test", unseen.test, "Test embeddings")->required();
  unseen_cmd->add_option("--trials", unseen.trials,
                         "speaker<TAB>test_id[<TAB>key]")
      ->required();
  unseen_cmd->add_option("--out", unseen.out, "Score file, - for stdout")
      ->capture_default_str();

  SimulateArgs simulate;
  CLI::App *sim_cmd =
      app.add_subcommand("simulate", "Draw embeddings from a model");
  sim_cmd->add_option("--dim", simulate.dim)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--speakers", simulate.speakers)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--channels", simulate.channels)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--per-speaker", simulate.per_speaker)
      ->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--policy", simulate.policy,
                      "round-robin, random or unique")
      ->capture_default_str();
  sim_cmd->add_option("--ry", simulate.ry)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--rx", simulate.rx)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--speaker-scale", simulate.speaker_scale)
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--channel-scale", simulate.channel_scale)
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--mean-scale", simulate.mean_scale)
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--seed", simulate.seed);
  sim_cmd->add_option("--out", simulate.out, "Embedding file")->required();
  sim_cmd->add_option("--model-out", simulate.model_out,
                      "Where to write the generating model");
  sim_cmd->add_option("--model", simulate.model,
                      "Generate from this model instead of a random one");
  sim_cmd->add_flag("--binary", simulate.binary, "Binary embedding format");

  VerifyArgs verify;
  CLI::App *verify_cmd =
      app.add_subcommand("verify", "Check the library against its oracles");
  verify_cmd->add_option("--seed", verify.options.seed)->capture_default_str();
  verify_cmd->add_option("--suite", verify.suites, "Suite(s) to run")
      ->check(CLI::IsMember(VerifySuiteNames()));
  verify_cmd->add_option("--instances", verify.options.instances)
      ->capture_default_str()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--trials", verify.options.trials)
      ->capture_default_str()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--em-iters", verify.options.em_iterations)
      ->capture_default_str()->check(CLI::Range(2, 100000));

  EvalArgs eval;
  CLI::App *eval_cmd = app.add_subcommand("eval", "EER of a keyed score file");
  eval_cmd->add_option("--scores", eval.scores, "Score file")->required();
  eval_cmd->add_option("--trials", eval.trials, "Keyed trial list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return RunTrain(train);
    if (*score_cmd) return RunScore(score);
    if (*unseen_cmd) return RunScoreUnseen(unseen);
    if (*sim_cmd) return RunSimulate(simulate);
    if (*verify_cmd) return RunVerify(verify);
    if (*eval_cmd) return RunEval(eval);
  } catch (const UsageError &e) {
    std::cerr << "jplda: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument &e) {
    std::cerr << "jplda: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError &e) {
    std::cerr << "jplda: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError &e) {
    std::cerr << "jplda: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError &e) {
    std::cerr << "jplda: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CapacityError &e) {
    std::cerr << "jplda: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
