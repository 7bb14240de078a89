// include/jplda/io.h

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

#ifndef JPLDA_IO_H_
#define JPLDA_IO_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jplda/embedding-table.h"
#include "jplda/model.h"
#include "jplda/scoring.h"

// File formats.
//
// Embeddings, text: one sample per line,
//   sample_id<TAB>speaker<TAB>channel<TAB>v1 v2 ... vd
// with shortest round-trip decimal floats. Blank lines and lines starting
// with '#' are ignored.
//
// Embeddings, binary (little-endian):
//   "JPLDA-EMB" | u32 version | u64 N | u32 d
//   N x { u64 sample_id_off | u64 speaker_off | u64 channel_off | d x f64 }
//   u64 table_bytes | string table of { u32 length | bytes }
// Offsets are relative to the start of the string table.
//
// Model (little-endian):
//   "JPLDA-MDL" | u32 version | u32 d | u32 R_y | u32 R_x
//   mean (d) | diag(D) (d) | V row-major (d x R_y) | U row-major (d x R_x)
// all as f64.
//
// Trials: enroll_id<TAB>test_id[<TAB>target|nontarget]
// Scores: enroll_id<TAB>test_id<TAB>llr<TAB>llr_o<TAB>llr_i[<TAB>key], 17
// significant digits, optionally preceded by '#' comment lines. The key
// column is copied from keyed trials.

namespace jplda {

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Shortest decimal string that parses back to the same double.
std::string FormatRoundTrip(double value);
/// "%.17g".
std::string FormatScore(double value);

std::vector<RawRow> ParseEmbeddingText(std::istream &is,
                                       const std::string &source);
void WriteEmbeddingText(std::ostream &os, std::span<const RawRow> rows);

std::vector<RawRow> ParseEmbeddingBinary(std::istream &is,
                                         const std::string &source);
void WriteEmbeddingBinary(std::ostream &os, std::span<const RawRow> rows);

/// Detects the binary form by its magic bytes. Throws IoError when the
/// file cannot be opened and InputError on malformed content.
std::vector<RawRow> ReadEmbeddingRows(const std::string &path);
EmbeddingTable ReadEmbeddings(const std::string &path);
void WriteEmbeddings(const EmbeddingTable &table, const std::string &path,
                     bool binary = false);

void WriteModel(std::ostream &os, const ModelParams &params);
ModelParams ReadModel(std::istream &is, const std::string &source);
void WriteModelFile(const ModelParams &params, const std::string &path);
ModelParams ReadModelFile(const std::string &path);

std::vector<Trial> ParseTrials(std::istream &is, const std::string &source);
std::vector<Trial> ReadTrialsFile(const std::string &path);

void WriteScores(std::ostream &os, std::span<const Trial> trials,
                 std::span<const TrialScore> scores);

/// A score line read back for evaluation.
struct ScoredTrial {
  std::string enroll_id;
  std::string test_id;
  double llr = 0.0;
  std::optional<bool> target;
};

/// Accepts the score format above with an optional sixth key column.
std::vector<ScoredTrial> ParseScores(std::istream &is,
                                     const std::string &source);

}  // namespace jplda

#endif  // JPLDA_IO_H_
