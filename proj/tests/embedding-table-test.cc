// tests/embedding-table-test.cc

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

#include <random>
#include <stdexcept>

#include "jplda/embedding-table.h"
#include "jplda/errors.h"
#include "test-util.h"

using namespace jplda;
using jplda::testing::Vec;

TEST_CASE("ingest counts speakers, channels and occupancy") {
  const std::vector<RawRow> rows = {{"u1", "a", "x", Vec({1, 2})},
                                    {"u2", "a", "y", Vec({3, 4})},
                                    {"u3", "b", "x", Vec({5, 6})}};
  const EmbeddingTable t = Ingest(rows);
  CHECK(t.NumSpeakers() == 2);
  CHECK(t.NumChannels() == 2);
  CHECK(t.Occupancy(0, 0) == 1);
  CHECK(t.Occupancy(0, 1) == 1);
  CHECK(t.Occupancy(1, 0) == 1);
  CHECK(t.Occupancy(1, 1) == 0);
  CHECK(t.SpeakerNames() == std::vector<std::string>{"a", "b"});
  CHECK(t.ChannelNames() == std::vector<std::string>{"x", "y"});
  CHECK(t.SpeakerSums().col(0) == Vec({4, 6}));
  CHECK(t.ChannelSums().col(0) == Vec({6, 8}));
}

TEST_CASE("single row table") {
  const std::vector<RawRow> rows = {{"u", "s", "c", Vec({0.5, -1, 2})}};
  const EmbeddingTable t = Ingest(rows);
  CHECK(t.NumSpeakers() == 1);
  CHECK(t.NumChannels() == 1);
  CHECK(t.NumSamples() == 1);
  CHECK(t.SpeakerSums().col(0) == rows[0].features);
  CHECK(t.ChannelSums().col(0) == rows[0].features);
}

TEST_CASE("sums match a second summation pass") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> spk(0, 29), chn(0, 9);
  const int n = 1000, d = 4;
  const Matrix samples = jplda::testing::RandomMatrix(d, n, rng);
  std::vector<RawRow> rows;
  for (int i = 0; i < n; ++i)
    rows.push_back({"u" + std::to_string(i), "s" + std::to_string(spk(rng)),
                    "c" + std::to_string(chn(rng)), samples.col(i)});
  const EmbeddingTable t = Ingest(rows);

  Matrix f = Matrix::Zero(d, t.NumSpeakers());
  Matrix g = Matrix::Zero(d, t.NumChannels());
  std::vector<int> ns(t.NumSpeakers()), nc(t.NumChannels());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      f(k, t.Speaker(i)) += samples(k, i);
      g(k, t.Channel(i)) += samples(k, i);
    }
    ++ns[t.Speaker(i)];
    ++nc[t.Channel(i)];
  }
  CHECK(t.SpeakerSums() == f);
  CHECK(t.ChannelSums() == g);
  CHECK(t.SpeakerCounts() == ns);
  CHECK(t.ChannelCounts() == nc);

  // Occupancy rows and columns reconcile with the counts.
  std::vector<int> col(t.NumChannels());
  for (int s = 0; s < t.NumSpeakers(); ++s) {
    int row = 0;
    for (const ChannelCount &cc : t.SpeakerChannels(s)) {
      row += cc.count;
      col[cc.channel] += cc.count;
    }
    CHECK(row == ns[s]);
  }
  CHECK(col == nc);
}

TEST_CASE("ingest rejects bad input") {
  CHECK_THROWS_AS(Ingest(std::vector<RawRow>{}), InputError);
  const std::vector<RawRow> rows = {{"u1", "a", "x", Vec({1, 2})},
                                    {"odd", "a", "x", Vec({1, 2, 3})}};
  try {
    Ingest(rows);
    FAIL("expected InputError");
  } catch (const InputError &e) {
    CHECK(std::string(e.what()).find("odd") != std::string::npos);
  }
  CHECK_THROWS_AS(EmbeddingTable::FromLabels(Matrix::Zero(2, 2), {0, 2}, {0, 0}),
                  InputError);
}

TEST_CASE("center") {
  std::mt19937_64 rng(9);
  const Matrix samples = jplda::testing::RandomMatrix(3, 20, rng, 4.0);
  std::vector<int> spk(20), chn(20);
  for (int i = 0; i < 20; ++i) {
    spk[i] = i % 4;
    chn[i] = i % 3;
  }
  const EmbeddingTable t = EmbeddingTable::FromLabels(samples, spk, chn);

  CHECK(Center(t, Vector::Zero(3)).Samples() == t.Samples());
  CHECK(MaxAbs(Center(t, t.Mean()).Mean()) <= 1e-12);

  const Vector mu = Vec({1.5, -2.0, 0.25});
  const EmbeddingTable back = Center(Center(t, mu), -mu);
  CHECK(MaxAbs(back.Samples() - t.Samples()) <= 1e-12);
  CHECK(MaxAbs(back.SpeakerSums() - t.SpeakerSums()) <= 1e-12);

  CHECK_THROWS(Center(t, Vector::Zero(2)));
}
