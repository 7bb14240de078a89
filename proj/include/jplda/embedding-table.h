// include/jplda/embedding-table.h

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

#ifndef JPLDA_EMBEDDING_TABLE_H_
#define JPLDA_EMBEDDING_TABLE_H_

#include <span>
#include <string>
#include <vector>

#include "jplda/linalg.h"

namespace jplda {

/// One input record before label remapping.
struct RawRow {
  std::string sample_id;
  std::string speaker;
  std::string channel;
  Vector features;
};

/// Number of samples a speaker has in one channel.
struct ChannelCount {
  int channel;
  int count;
};

/**
   N labeled embeddings plus the count and sum statistics the model needs.

   Samples are stored column-wise (d x N). Speaker ids are in [0, S) and
   channel ids in [0, C); every id occurs at least once. The table is
   immutable once built.
*/
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  /// Throws InputError if labels are out of range, not contiguous, or the
  /// label vectors disagree in length with the samples.
  EmbeddingTable(std::vector<std::string> sample_ids,
                 std::vector<std::string> speaker_names,
                 std::vector<std::string> channel_names, Matrix samples,
                 std::vector<int> speakers, std::vector<int> channels);

  /// Builds a table with generated names ("s0", "c0", "i0", ...).
  static EmbeddingTable FromLabels(Matrix samples, std::vector<int> speakers,
                                   std::vector<int> channels);

  int Dim() const { return static_cast<int>(samples_.rows()); }
  int NumSamples() const { return static_cast<int>(samples_.cols()); }
  int NumSpeakers() const { return static_cast<int>(speaker_names_.size()); }
  int NumChannels() const { return static_cast<int>(channel_names_.size()); }

  const Matrix &Samples() const { return samples_; }
  Eigen::Ref<const Vector> Sample(int i) const { return samples_.col(i); }
  int Speaker(int i) const { return speakers_[i]; }
  int Channel(int i) const { return channels_[i]; }
  const std::vector<int> &SpeakerLabels() const { return speakers_; }
  const std::vector<int> &ChannelLabels() const { return channels_; }

  const std::vector<std::string> &SampleIds() const { return sample_ids_; }
  const std::vector<std::string> &SpeakerNames() const {
    return speaker_names_;
  }
  const std::vector<std::string> &ChannelNames() const {
    return channel_names_;
  }

  const std::vector<int> &SpeakerCounts() const { return speaker_counts_; }
  const std::vector<int> &ChannelCounts() const { return channel_counts_; }

  /// Channels used by speaker s with their counts, sorted by channel id.
  const std::vector<ChannelCount> &SpeakerChannels(int s) const {
    return occupancy_[s];
  }
  /// n_sc; zero when speaker s never uses channel c.
  int Occupancy(int s, int c) const;

  /// f_s as columns (d x S).
  const Matrix &SpeakerSums() const { return speaker_sums_; }
  /// g_c as columns (d x C).
  const Matrix &ChannelSums() const { return channel_sums_; }

  Vector Mean() const;

 private:
  void ComputeStats();

  std::vector<std::string> sample_ids_;
  std::vector<std::string> speaker_names_;
  std::vector<std::string> channel_names_;
  Matrix samples_;
  std::vector<int> speakers_;
  std::vector<int> channels_;

  std::vector<int> speaker_counts_;
  std::vector<int> channel_counts_;
  std::vector<std::vector<ChannelCount>> occupancy_;
  Matrix speaker_sums_;
  Matrix channel_sums_;
};

/// Remaps speaker and channel names to contiguous ids in order of first
/// occurrence. Throws InputError on empty input or a dimension mismatch
/// (naming the offending sample id).
EmbeddingTable Ingest(std::span<const RawRow> rows);

/// Inverse of Ingest, one row per sample in table order.
std::vector<RawRow> ToRows(const EmbeddingTable &table);

/// Returns a copy with every sample replaced by m_i - mu.
EmbeddingTable Center(const EmbeddingTable &table, const Vector &mu);

}  // namespace jplda

#endif  // JPLDA_EMBEDDING_TABLE_H_
