// tests/cli-test.cc

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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "jplda/io.h"
#include "jplda/scoring.h"

using namespace jplda;
namespace fs = std::filesystem;

namespace {

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() / ("jplda-cli-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  std::string Path(const std::string &name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout and stderr captured; returns the exit code.
  int Run(const std::string &args) {
    const std::string cmd = std::string(JPLDA_CLI) + " " + args + " >" +
                            Path("stdout") + " 2>" + Path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string Out() const { return Read(Path("stdout")); }
  std::string Err() const { return Read(Path("stderr")); }

  static std::string Read(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  void Write(const std::string &name, const std::string &text) const {
    std::ofstream(Path(name)) << text;
  }

 private:
  fs::path dir_;
};

std::vector<ScoredTrial> Scores(const std::string &path) {
  std::ifstream is(path);
  return ParseScores(is, path);
}

// Simulated train/enroll/test data plus its model.
void MakeData(Sandbox &box) {
  REQUIRE(box.Run("simulate --dim 6 --speakers 12 --channels 4 --per-speaker 4 "
                  "--ry 2 --rx 2 --seed 3 --out " + box.Path("train.tsv") +
                  " --model-out " + box.Path("true.mdl")) == 0);
  REQUIRE(box.Run("simulate --model " + box.Path("true.mdl") +
                  " --speakers 3 --channels 3 --per-speaker 1 --seed 4 --out " +
                  box.Path("enroll.tsv")) == 0);
  REQUIRE(box.Run("simulate --model " + box.Path("true.mdl") +
                  " --speakers 3 --channels 2 --per-speaker 2 --seed 5 --out " +
                  box.Path("test.tsv")) == 0);
  box.Write("trials.tsv",
            "spk0000-utt0000\tspk0000-utt0000\ttarget\n"
            "spk0000-utt0000\tspk0001-utt0001\tnontarget\n"
            "spk0002-utt0000\tspk0002-utt0001\ttarget\n"
            "spk0001-utt0000\tspk0000-utt0001\tnontarget\n");
}

}  // namespace

TEST_CASE("train is deterministic and logs every iteration") {
  Sandbox box;
  MakeData(box);
  const std::string common = "train --data " + box.Path("train.tsv") +
                             " --ry 2 --rx 2 --seed 7 --max-iters 5 --rel-tol 0";
  REQUIRE(box.Run(common + " --out " + box.Path("a.mdl") + " --log " +
                  box.Path("a.log")) == 0);
  REQUIRE(box.Run(common + " --out " + box.Path("b.mdl")) == 0);
  CHECK(Sandbox::Read(box.Path("a.mdl")) == Sandbox::Read(box.Path("b.mdl")));

  std::istringstream log(Sandbox::Read(box.Path("a.log")));
  std::string line;
  int n = 0;
  while (std::getline(log, line)) {
    std::istringstream fields(line);
    int iter;
    double ll, delta;
    CHECK(static_cast<bool>(fields >> iter >> ll >> delta));
    CHECK(iter == n++);
  }
  CHECK(n == 5);
}

TEST_CASE("train error exit codes") {
  Sandbox box;
  CHECK(box.Run("train --data " + box.Path("missing.tsv") +
                " --ry 1 --rx 1 --out " + box.Path("m.mdl")) == 2);
  CHECK(box.Err().find(box.Path("missing.tsv")) != std::string::npos);

  MakeData(box);
  CHECK(box.Run("train --data " + box.Path("train.tsv") + " --ry 0 --rx 1 --out " +
                box.Path("m.mdl")) == 64);
  CHECK(box.Run("train --data " + box.Path("train.tsv") + " --ry 7 --rx 1 --out " +
                box.Path("m.mdl")) == 64);
  CHECK(box.Run("train --data " + box.Path("train.tsv") +
                " --ry 1 --rx 1 --max-dense-dim 1 --out " + box.Path("m.mdl")) == 3);
  CHECK(box.Err().find("EM iteration 0") != std::string::npos);

  box.Write("bad.tsv", "u1\ts\tc\t1 2\nu2\ts\tc\t1 two\n");
  CHECK(box.Run("train --data " + box.Path("bad.tsv") + " --ry 1 --rx 1 --out " +
                box.Path("m.mdl")) == 2);
  CHECK(box.Err().find("bad.tsv:2") != std::string::npos);
  CHECK(box.Run("bogus") == 64);
}

TEST_CASE("score writes the priors header and honours --priors") {
  Sandbox box;
  MakeData(box);
  const std::string base = "score --model " + box.Path("true.mdl") + " --enroll " +
                           box.Path("enroll.tsv") + " --test " +
                           box.Path("test.tsv") + " --trials " +
                           box.Path("trials.tsv");
  REQUIRE(box.Run(base + " --out " + box.Path("uniform.txt")) == 0);
  CHECK(Sandbox::Read(box.Path("uniform.txt"))
            .rfind("# priors pss=0.5 pds=0.5 psd=0.5 pdd=0.5\n", 0) == 0);

  REQUIRE(box.Run(base + " --priors 0,1,0,1 --out " + box.Path("dc.txt")) == 0);
  const std::vector<ScoredTrial> dc = Scores(box.Path("dc.txt"));
  REQUIRE(dc.size() == 4);
  const ModelParams params = ReadModelFile(box.Path("true.mdl"));
  const EmbeddingTable enroll = ReadEmbeddings(box.Path("enroll.tsv"));
  const EmbeddingTable test = ReadEmbeddings(box.Path("test.tsv"));
  auto find = [](const EmbeddingTable &t, const std::string &id) {
    int i = 0;
    while (t.SampleIds()[i] != id) ++i;
    return Vector(t.Sample(i));
  };
  for (const ScoredTrial &s : dc) {
    const double ref = ScoreTrial(params, {0, 1, 0, 1}, find(enroll, s.enroll_id),
                                  find(test, s.test_id)).llr;
    CHECK(s.llr == ref);
  }
  CHECK(*dc[0].target);
  CHECK(!*dc[1].target);

  box.Write("empty.tsv", "");
  CHECK(box.Run("score --model " + box.Path("true.mdl") + " --enroll " +
                box.Path("enroll.tsv") + " --test " + box.Path("test.tsv") +
                " --trials " + box.Path("empty.tsv") + " --out " +
                box.Path("empty.txt")) == 0);
  CHECK(Scores(box.Path("empty.txt")).empty());

  CHECK(box.Run(base + " --priors 0.5,0.5,0.5") == 64);
  CHECK(box.Run(base + " --priors 0.5,0.4,0.5,0.5") == 64);
  CHECK(box.Run(base + " --priors a,b,c,d") == 64);

  box.Write("unknown.tsv", "spk0000-utt0000\tspk0000-utt0000\nspk0000-utt0000\tghost\n");
  CHECK(box.Run("score --model " + box.Path("true.mdl") + " --enroll " +
                box.Path("enroll.tsv") + " --test " + box.Path("test.tsv") +
                " --trials " + box.Path("unknown.tsv")) == 2);
  CHECK(box.Err().find("ghost") != std::string::npos);
}

TEST_CASE("score-unseen agrees with score for single enrollments") {
  Sandbox box;
  MakeData(box);
  // Every enrollment speaker has exactly one sample.
  box.Write("spk-trials.tsv",
            "spk0000\tspk0000-utt0000\n"
            "spk0001\tspk0002-utt0001\n"
            "spk0002\tspk0001-utt0000\n");
  box.Write("id-trials.tsv",
            "spk0000-utt0000\tspk0000-utt0000\n"
            "spk0001-utt0000\tspk0002-utt0001\n"
            "spk0002-utt0000\tspk0001-utt0000\n");
  REQUIRE(box.Run("score-unseen --model " + box.Path("true.mdl") + " --enroll " +
                  box.Path("enroll.tsv") + " --test " + box.Path("test.tsv") +
                  " --trials " + box.Path("spk-trials.tsv") + " --out " +
                  box.Path("unseen.txt")) == 0);
  REQUIRE(box.Run("score --model " + box.Path("true.mdl") + " --enroll " +
                  box.Path("enroll.tsv") + " --test " + box.Path("test.tsv") +
                  " --trials " + box.Path("id-trials.tsv") +
                  " --priors 0,1,0,1 --out " + box.Path("single.txt")) == 0);
  const std::vector<ScoredTrial> a = Scores(box.Path("unseen.txt"));
  const std::vector<ScoredTrial> b = Scores(box.Path("single.txt"));
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == 3);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(a[k].llr - b[k].llr) <= 1e-10 * std::max(1.0, std::abs(b[k].llr)));

  box.Write("ghost.tsv", "nobody\tspk0000-utt0000\n");
  CHECK(box.Run("score-unseen --model " + box.Path("true.mdl") + " --enroll " +
                box.Path("enroll.tsv") + " --test " + box.Path("test.tsv") +
                " --trials " + box.Path("ghost.tsv")) == 2);
  CHECK(box.Err().find("nobody") != std::string::npos);
}

TEST_CASE("score-unseen counts duplicate enrollment rows") {
  Sandbox box;
  MakeData(box);
  const std::string enroll = Sandbox::Read(box.Path("enroll.tsv"));
  const std::string first = enroll.substr(0, enroll.find('\n') + 1);
  box.Write("dup.tsv", first + first);
  box.Write("t.tsv", "spk0000\tspk0000-utt0000\n");
  REQUIRE(box.Run("score-unseen --model " + box.Path("true.mdl") + " --enroll " +
                  box.Path("dup.tsv") + " --test " + box.Path("test.tsv") +
                  " --trials " + box.Path("t.tsv") + " --out " +
                  box.Path("s.txt")) == 0);
  const ModelParams params = ReadModelFile(box.Path("true.mdl"));
  const std::vector<RawRow> rows = ReadEmbeddingRows(box.Path("dup.tsv"));
  const std::vector<RawRow> tests = ReadEmbeddingRows(box.Path("test.tsv"));
  const EnrollmentSample twice[] = {{rows[0].features, 0}, {rows[1].features, 0}};
  const double ref = ScoreUnseenChannel(params, twice, tests[0].features).llr;
  const std::vector<ScoredTrial> s = Scores(box.Path("s.txt"));
  REQUIRE(s.size() == 1);
  CHECK(s[0].llr == ref);
}

TEST_CASE("simulate is seeded and writes both formats") {
  Sandbox box;
  const std::string args = "simulate --dim 4 --speakers 5 --channels 2 --per-speaker 3 "
                           "--ry 1 --rx 1 --seed 9 --policy random --out ";
  REQUIRE(box.Run(args + box.Path("a.tsv")) == 0);
  REQUIRE(box.Run(args + box.Path("b.tsv")) == 0);
  CHECK(Sandbox::Read(box.Path("a.tsv")) == Sandbox::Read(box.Path("b.tsv")));
  REQUIRE(box.Run(args + box.Path("c.bin") + " --binary") == 0);
  CHECK(Sandbox::Read(box.Path("c.bin")).rfind("JPLDA-EMB", 0) == 0);
  const EmbeddingTable a = ReadEmbeddings(box.Path("a.tsv"));
  const EmbeddingTable c = ReadEmbeddings(box.Path("c.bin"));
  CHECK(a.Samples() == c.Samples());
  CHECK(a.SampleIds() == c.SampleIds());
  CHECK(box.Run(args + box.Path("d.tsv") + " --policy sticky") == 64);
  CHECK(box.Run("simulate --dim 2 --ry 3 --out " + box.Path("e.tsv")) == 64);
}

TEST_CASE("verify is reproducible and selectable") {
  Sandbox box;
  REQUIRE(box.Run("verify --seed 123 --instances 5 --trials 10") == 0);
  const std::string first = box.Out();
  REQUIRE(box.Run("verify --seed 123 --instances 5 --trials 10") == 0);
  CHECK(box.Out() == first);
  CHECK(first.find("seed=123") != std::string::npos);

  REQUIRE(box.Run("verify --suite posterior --instances 5") == 0);
  const std::string only = box.Out();
  CHECK(only.find("posterior/") != std::string::npos);
  CHECK(only.find("scoring/") == std::string::npos);
  CHECK(box.Run("verify --suite nonsense") == 64);
}

TEST_CASE("eval computes the EER of keyed scores") {
  Sandbox box;
  box.Write("s.txt",
            "# priors pss=0.5 pds=0.5 psd=0.5 pdd=0.5\n"
            "a\tb\t0\t0\t0\ttarget\n"
            "a\tc\t2\t0\t0\ttarget\n"
            "a\td\t-1\t0\t0\tnontarget\n"
            "a\te\t1\t0\t0\tnontarget\n");
  REQUIRE(box.Run("eval --scores " + box.Path("s.txt")) == 0);
  CHECK(box.Out().rfind("eer\t0.25\n", 0) == 0);

  box.Write("u.txt", "a\tb\t0\t0\t0\na\tc\t1\t0\t0\n");
  CHECK(box.Run("eval --scores " + box.Path("u.txt")) == 2);
  box.Write("k.tsv", "a\tb\tnontarget\na\tc\ttarget\n");
  REQUIRE(box.Run("eval --scores " + box.Path("u.txt") + " --trials " +
                  box.Path("k.tsv")) == 0);
  CHECK(box.Out().rfind("eer\t0\n", 0) == 0);
}
