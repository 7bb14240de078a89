// src/embedding-table.cc

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

#include "jplda/embedding-table.h"

#include <algorithm>
#include <unordered_map>

#include "jplda/errors.h"

namespace jplda {

EmbeddingTable::EmbeddingTable(std::vector<std::string> sample_ids,
                               std::vector<std::string> speaker_names,
                               std::vector<std::string> channel_names,
                               Matrix samples, std::vector<int> speakers,
                               std::vector<int> channels)
    : sample_ids_(std::move(sample_ids)),
      speaker_names_(std::move(speaker_names)),
      channel_names_(std::move(channel_names)),
      samples_(std::move(samples)),
      speakers_(std::move(speakers)),
      channels_(std::move(channels)) {
  const auto n = static_cast<size_t>(samples_.cols());
  if (n == 0) throw InputError("embedding table is empty");
  if (samples_.rows() < 1) throw InputError("embedding dimension must be >= 1");
  if (speakers_.size() != n || channels_.size() != n || sample_ids_.size() != n)
    throw InputError("label count does not match sample count");
  ComputeStats();
}

EmbeddingTable EmbeddingTable::FromLabels(Matrix samples,
                                          std::vector<int> speakers,
                                          std::vector<int> channels) {
  const int n = static_cast<int>(samples.cols());
  int num_speakers = 0, num_channels = 0;
  for (int s : speakers) num_speakers = std::max(num_speakers, s + 1);
  for (int c : channels) num_channels = std::max(num_channels, c + 1);
  std::vector<std::string> ids(n), spk(num_speakers), chn(num_channels);
  for (int i = 0; i < n; ++i) ids[i] = "i" + std::to_string(i);
  for (int s = 0; s < num_speakers; ++s) spk[s] = "s" + std::to_string(s);
  for (int c = 0; c < num_channels; ++c) chn[c] = "c" + std::to_string(c);
  return EmbeddingTable(std::move(ids), std::move(spk), std::move(chn),
                        std::move(samples), std::move(speakers),
                        std::move(channels));
}

void EmbeddingTable::ComputeStats() {
  const int num_speakers = NumSpeakers(), num_channels = NumChannels();
  speaker_counts_.assign(num_speakers, 0);
  channel_counts_.assign(num_channels, 0);
  for (int i = 0; i < NumSamples(); ++i) {
    const int s = speakers_[i], c = channels_[i];
    if (s < 0 || s >= num_speakers)
      throw InputError("speaker id out of range for sample " + sample_ids_[i]);
    if (c < 0 || c >= num_channels)
      throw InputError("channel id out of range for sample " + sample_ids_[i]);
    ++speaker_counts_[s];
    ++channel_counts_[c];
  }
  for (int s = 0; s < num_speakers; ++s)
    if (speaker_counts_[s] == 0)
      throw InputError("speaker '" + speaker_names_[s] + "' has no samples");
  for (int c = 0; c < num_channels; ++c)
    if (channel_counts_[c] == 0)
      throw InputError("channel '" + channel_names_[c] + "' has no samples");

  // Per-speaker sparse occupancy rows, sorted by channel.
  std::vector<std::unordered_map<int, int>> rows(num_speakers);
  for (int i = 0; i < NumSamples(); ++i) ++rows[speakers_[i]][channels_[i]];
  occupancy_.assign(num_speakers, {});
  for (int s = 0; s < num_speakers; ++s) {
    auto &row = occupancy_[s];
    row.reserve(rows[s].size());
    for (const auto &[c, n] : rows[s]) row.push_back({c, n});
    std::sort(row.begin(), row.end(),
              [](const ChannelCount &a, const ChannelCount &b) {
                return a.channel < b.channel;
              });
  }

  speaker_sums_ = Matrix::Zero(Dim(), num_speakers);
  channel_sums_ = Matrix::Zero(Dim(), num_channels);
  for (int i = 0; i < NumSamples(); ++i) {
    speaker_sums_.col(speakers_[i]) += samples_.col(i);
    channel_sums_.col(channels_[i]) += samples_.col(i);
  }
}

int EmbeddingTable::Occupancy(int s, int c) const {
  const auto &row = occupancy_[s];
  auto it = std::lower_bound(
      row.begin(), row.end(), c,
      [](const ChannelCount &e, int key) { return e.channel < key; });
  return (it != row.end() && it->channel == c) ? it->count : 0;
}

Vector EmbeddingTable::Mean() const {
  return samples_.rowwise().sum() / static_cast<double>(NumSamples());
}

EmbeddingTable Ingest(std::span<const RawRow> rows) {
  if (rows.empty()) throw InputError("no embeddings to ingest");
  const Eigen::Index dim = rows.front().features.size();
  if (dim < 1)
    throw InputError("sample " + rows.front().sample_id +
                     " has an empty feature vector");

  std::vector<std::string> ids, speaker_names, channel_names;
  std::unordered_map<std::string, int> speaker_index, channel_index;
  std::vector<int> speakers, channels;
  Matrix samples(dim, static_cast<Eigen::Index>(rows.size()));
  ids.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const RawRow &row = rows[i];
    if (row.features.size() != dim)
      throw InputError("sample " + row.sample_id + " has dimension " +
                       std::to_string(row.features.size()) + ", expected " +
                       std::to_string(dim));
    auto [sit, snew] = speaker_index.try_emplace(
        row.speaker, static_cast<int>(speaker_names.size()));
    if (snew) speaker_names.push_back(row.speaker);
    auto [cit, cnew] = channel_index.try_emplace(
        row.channel, static_cast<int>(channel_names.size()));
    if (cnew) channel_names.push_back(row.channel);
    speakers.push_back(sit->second);
    channels.push_back(cit->second);
    ids.push_back(row.sample_id);
    samples.col(static_cast<Eigen::Index>(i)) = row.features;
  }
  return EmbeddingTable(std::move(ids), std::move(speaker_names),
                        std::move(channel_names), std::move(samples),
                        std::move(speakers), std::move(channels));
}

std::vector<RawRow> ToRows(const EmbeddingTable &table) {
  std::vector<RawRow> rows;
  rows.reserve(table.NumSamples());
  for (int i = 0; i < table.NumSamples(); ++i) {
    rows.push_back({table.SampleIds()[i],
                    table.SpeakerNames()[table.Speaker(i)],
                    table.ChannelNames()[table.Channel(i)],
                    table.Sample(i)});
  }
  return rows;
}

EmbeddingTable Center(const EmbeddingTable &table, const Vector &mu) {
  if (mu.size() != table.Dim())
    throw InputError("mean has dimension " + std::to_string(mu.size()) +
                     ", table has " + std::to_string(table.Dim()));
  Matrix centered = table.Samples().colwise() - mu;
  return EmbeddingTable(table.SampleIds(), table.SpeakerNames(),
                        table.ChannelNames(), std::move(centered),
                        table.SpeakerLabels(), table.ChannelLabels());
}

}  // namespace jplda
