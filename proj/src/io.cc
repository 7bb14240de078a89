// src/io.cc

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

#include "jplda/io.h"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "jplda/errors.h"

namespace jplda {

namespace {

constexpr std::string_view kEmbeddingMagic = "JPLDA-EMB";
constexpr std::string_view kModelMagic = "JPLDA-MDL";

std::string Where(const std::string &source, int line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool ParseDouble(std::string_view token, double *value) {
  const char *end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, *value);
  return ec == std::errc() && ptr == end;
}

bool SkipLine(std::string_view line) {
  return line.empty() || line.front() == '#';
}

void StripCr(std::string *line) {
  if (!line->empty() && line->back() == '\r') line->pop_back();
}

// Little-endian primitives.

template <typename T>
void PutLe(std::ostream &os, T value) {
  std::array<char, sizeof(T)> bytes;
  for (size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  os.write(bytes.data(), bytes.size());
}

void PutF64(std::ostream &os, double value) {
  PutLe(os, std::bit_cast<std::uint64_t>(value));
}

template <typename T>
T GetLe(std::istream &is, const std::string &source) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char *>(bytes.data()), bytes.size()))
    throw InputError(source + ": unexpected end of file");
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

double GetF64(std::istream &is, const std::string &source) {
  return std::bit_cast<double>(GetLe<std::uint64_t>(is, source));
}

void ExpectMagic(std::istream &is, std::string_view magic,
                 const std::string &source) {
  std::string got(magic.size(), '\0');
  if (!is.read(got.data(), got.size()) || got != magic)
    throw InputError(source + ": bad magic, expected " + std::string(magic));
}

std::ifstream OpenIn(const std::string &path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return is;
}

std::ofstream OpenOut(const std::string &path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

void CheckWritten(const std::ostream &os, const std::string &path) {
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string FormatRoundTrip(double value) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string FormatScore(double value) {
  std::array<char, 64> buf;
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return std::string(buf.data(), n);
}

std::vector<RawRow> ParseEmbeddingText(std::istream &is,
                                       const std::string &source) {
  std::vector<RawRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCr(&line);
    if (SkipLine(line)) continue;
    const auto fields = Split(line, '\t');
    if (fields.size() != 4)
      throw InputError(Where(source, line_no) +
                       "expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw InputError(Where(source, line_no) + "empty label field");
    std::vector<double> values;
    std::string_view rest = fields[3];
    while (!rest.empty()) {
      const size_t start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const size_t end = rest.find(' ');
      const std::string_view token = rest.substr(0, end);
      double v;
      if (!ParseDouble(token, &v))
        throw InputError(Where(source, line_no) + "bad number '" +
                         std::string(token) + "'");
      values.push_back(v);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    if (values.empty())
      throw InputError(Where(source, line_no) + "sample " +
                       std::string(fields[0]) + " has no features");
    RawRow row{std::string(fields[0]), std::string(fields[1]),
               std::string(fields[2]),
               Eigen::Map<const Vector>(values.data(), values.size())};
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteEmbeddingText(std::ostream &os, std::span<const RawRow> rows) {
  for (const RawRow &row : rows) {
    os << row.sample_id << '\t' << row.speaker << '\t' << row.channel << '\t';
    for (Eigen::Index k = 0; k < row.features.size(); ++k) {
      if (k > 0) os << ' ';
      os << FormatRoundTrip(row.features(k));
    }
    os << '\n';
  }
}

void WriteEmbeddingBinary(std::ostream &os, std::span<const RawRow> rows) {
  const std::uint32_t d =
      rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().features.size());
  std::string table;
  auto intern = [&table](const std::string &s) {
    const std::uint64_t offset = table.size();
    const auto len = static_cast<std::uint32_t>(s.size());
    for (int i = 0; i < 4; ++i) table.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
    table += s;
    return offset;
  };

  os.write(kEmbeddingMagic.data(), kEmbeddingMagic.size());
  PutLe<std::uint32_t>(os, kEmbeddingFormatVersion);
  PutLe<std::uint64_t>(os, rows.size());
  PutLe<std::uint32_t>(os, d);
  for (const RawRow &row : rows) {
    if (row.features.size() != static_cast<Eigen::Index>(d))
      throw InputError("sample " + row.sample_id + " has inconsistent dimension");
    PutLe<std::uint64_t>(os, intern(row.sample_id));
    PutLe<std::uint64_t>(os, intern(row.speaker));
    PutLe<std::uint64_t>(os, intern(row.channel));
    for (Eigen::Index k = 0; k < row.features.size(); ++k)
      PutF64(os, row.features(k));
  }
  PutLe<std::uint64_t>(os, table.size());
  os.write(table.data(), static_cast<std::streamsize>(table.size()));
}

std::vector<RawRow> ParseEmbeddingBinary(std::istream &is,
                                         const std::string &source) {
  ExpectMagic(is, kEmbeddingMagic, source);
  const auto version = GetLe<std::uint32_t>(is, source);
  if (version != kEmbeddingFormatVersion)
    throw InputError(source + ": unsupported embedding format version " +
                     std::to_string(version));
  const auto n = GetLe<std::uint64_t>(is, source);
  const auto d = GetLe<std::uint32_t>(is, source);

  struct Pending {
    std::uint64_t id, speaker, channel;
    Vector features;
  };
  std::vector<Pending> pending;
  for (std::uint64_t i = 0; i < n; ++i) {
    Pending p;
    p.id = GetLe<std::uint64_t>(is, source);
    p.speaker = GetLe<std::uint64_t>(is, source);
    p.channel = GetLe<std::uint64_t>(is, source);
    p.features.resize(d);
    for (std::uint32_t k = 0; k < d; ++k) p.features(k) = GetF64(is, source);
    pending.push_back(std::move(p));
  }
  const auto table_size = GetLe<std::uint64_t>(is, source);
  std::string table(table_size, '\0');
  if (!is.read(table.data(), static_cast<std::streamsize>(table_size)))
    throw InputError(source + ": truncated string table");

  auto lookup = [&](std::uint64_t offset) {
    if (offset + 4 > table.size())
      throw InputError(source + ": string offset out of range");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
      len |= static_cast<std::uint32_t>(
                 static_cast<unsigned char>(table[offset + i]))
             << (8 * i);
    if (offset + 4 + len > table.size())
      throw InputError(source + ": string overruns table");
    return table.substr(offset + 4, len);
  };

  std::vector<RawRow> rows;
  rows.reserve(pending.size());
  for (Pending &p : pending)
    rows.push_back({lookup(p.id), lookup(p.speaker), lookup(p.channel),
                    std::move(p.features)});
  return rows;
}

std::vector<RawRow> ReadEmbeddingRows(const std::string &path) {
  std::ifstream is = OpenIn(path, std::ios::binary);
  std::string head(kEmbeddingMagic.size(), '\0');
  is.read(head.data(), head.size());
  const bool binary = is.gcount() == static_cast<std::streamsize>(head.size()) &&
                      head == kEmbeddingMagic;
  is.clear();
  is.seekg(0);
  return binary ? ParseEmbeddingBinary(is, path) : ParseEmbeddingText(is, path);
}

EmbeddingTable ReadEmbeddings(const std::string &path) {
  const std::vector<RawRow> rows = ReadEmbeddingRows(path);
  if (rows.empty()) throw InputError(path + ": no embeddings");
  return Ingest(rows);
}

void WriteEmbeddings(const EmbeddingTable &table, const std::string &path,
                     bool binary) {
  const std::vector<RawRow> rows = ToRows(table);
  std::ofstream os = OpenOut(path, binary ? std::ios::binary : std::ios::out);
  if (binary)
    WriteEmbeddingBinary(os, rows);
  else
    WriteEmbeddingText(os, rows);
  CheckWritten(os, path);
}

void WriteModel(std::ostream &os, const ModelParams &params) {
  params.Validate();
  const int d = params.Dim();
  os.write(kModelMagic.data(), kModelMagic.size());
  PutLe<std::uint32_t>(os, kModelFormatVersion);
  PutLe<std::uint32_t>(os, d);
  PutLe<std::uint32_t>(os, params.SpeakerRank());
  PutLe<std::uint32_t>(os, params.ChannelRank());
  for (int i = 0; i < d; ++i) PutF64(os, params.mean(i));
  for (int i = 0; i < d; ++i) PutF64(os, params.precision(i));
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < params.SpeakerRank(); ++k)
      PutF64(os, params.speaker_loadings(i, k));
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < params.ChannelRank(); ++k)
      PutF64(os, params.channel_loadings(i, k));
}

ModelParams ReadModel(std::istream &is, const std::string &source) {
  ExpectMagic(is, kModelMagic, source);
  const auto version = GetLe<std::uint32_t>(is, source);
  if (version != kModelFormatVersion)
    throw InputError(source + ": unsupported model format version " +
                     std::to_string(version));
  const auto d = GetLe<std::uint32_t>(is, source);
  const auto ry = GetLe<std::uint32_t>(is, source);
  const auto rx = GetLe<std::uint32_t>(is, source);
  if (d == 0 || ry == 0 || rx == 0 || ry > d || rx > d || d > (1u << 20))
    throw InputError(source + ": invalid model dimensions");

  ModelParams params;
  params.mean.resize(d);
  params.precision.resize(d);
  params.speaker_loadings.resize(d, ry);
  params.channel_loadings.resize(d, rx);
  for (std::uint32_t i = 0; i < d; ++i) params.mean(i) = GetF64(is, source);
  for (std::uint32_t i = 0; i < d; ++i) params.precision(i) = GetF64(is, source);
  for (std::uint32_t i = 0; i < d; ++i)
    for (std::uint32_t k = 0; k < ry; ++k)
      params.speaker_loadings(i, k) = GetF64(is, source);
  for (std::uint32_t i = 0; i < d; ++i)
    for (std::uint32_t k = 0; k < rx; ++k)
      params.channel_loadings(i, k) = GetF64(is, source);
  try {
    params.Validate();
  } catch (const std::invalid_argument &e) {
    throw InputError(source + ": " + e.what());
  }
  return params;
}

void WriteModelFile(const ModelParams &params, const std::string &path) {
  std::ofstream os = OpenOut(path, std::ios::binary);
  WriteModel(os, params);
  CheckWritten(os, path);
}

ModelParams ReadModelFile(const std::string &path) {
  std::ifstream is = OpenIn(path, std::ios::binary);
  return ReadModel(is, path);
}

std::vector<Trial> ParseTrials(std::istream &is, const std::string &source) {
  std::vector<Trial> trials;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCr(&line);
    if (SkipLine(line)) continue;
    const auto fields = Split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() ||
        fields[1].empty())
      throw InputError(Where(source, line_no) +
                       "expected enroll_id<TAB>test_id[<TAB>key]");
    Trial trial{std::string(fields[0]), std::string(fields[1]), std::nullopt,
                line_no};
    if (fields.size() == 3) {
      if (fields[2] == "target")
        trial.target = true;
      else if (fields[2] == "nontarget")
        trial.target = false;
      else
        throw InputError(Where(source, line_no) + "key must be target or "
                         "nontarget, got '" + std::string(fields[2]) + "'");
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

std::vector<Trial> ReadTrialsFile(const std::string &path) {
  std::ifstream is = OpenIn(path, std::ios::in);
  return ParseTrials(is, path);
}

void WriteScores(std::ostream &os, std::span<const Trial> trials,
                 std::span<const TrialScore> scores) {
  if (trials.size() != scores.size())
    throw std::invalid_argument("trial and score counts differ");
  for (size_t k = 0; k < trials.size(); ++k) {
    os << trials[k].enroll_id << '\t' << trials[k].test_id << '\t'
       << FormatScore(scores[k].llr) << '\t' << FormatScore(scores[k].llr_outer)
       << '\t' << FormatScore(scores[k].llr_inner);
    if (trials[k].target) os << '\t' << (*trials[k].target ? "target" : "nontarget");
    os << '\n';
  }
}

std::vector<ScoredTrial> ParseScores(std::istream &is,
                                     const std::string &source) {
  std::vector<ScoredTrial> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCr(&line);
    if (SkipLine(line)) continue;
    const auto fields = Split(line, '\t');
    if (fields.size() != 5 && fields.size() != 6)
      throw InputError(Where(source, line_no) + "expected 5 or 6 fields");
    ScoredTrial st{std::string(fields[0]), std::string(fields[1]), 0.0,
                   std::nullopt};
    if (!ParseDouble(fields[2], &st.llr))
      throw InputError(Where(source, line_no) + "bad score '" +
                       std::string(fields[2]) + "'");
    if (fields.size() == 6) {
      if (fields[5] == "target")
        st.target = true;
      else if (fields[5] == "nontarget")
        st.target = false;
      else
        throw InputError(Where(source, line_no) + "bad key '" +
                         std::string(fields[5]) + "'");
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace jplda
