// src/centered.h

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

#ifndef JPLDA_SRC_CENTERED_H_
#define JPLDA_SRC_CENTERED_H_

#include <optional>

#include "jplda/embedding-table.h"

namespace jplda::internal {

/// Borrows the table when mu is zero, otherwise owns a centered copy.
class CenteredTable {
 public:
  CenteredTable(const EmbeddingTable &table, const Vector &mu) {
    if (mu.size() == 0 || mu.isZero(0.0)) {
      ref_ = &table;
    } else {
      owned_.emplace(Center(table, mu));
      ref_ = &*owned_;
    }
  }
  CenteredTable(const CenteredTable &) = delete;
  CenteredTable &operator=(const CenteredTable &) = delete;

  const EmbeddingTable &operator*() const { return *ref_; }
  const EmbeddingTable *operator->() const { return ref_; }

 private:
  std::optional<EmbeddingTable> owned_;
  const EmbeddingTable *ref_;
};

}  // namespace jplda::internal

#endif  // JPLDA_SRC_CENTERED_H_
