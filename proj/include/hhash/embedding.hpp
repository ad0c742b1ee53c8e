#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hhash/types.hpp"

namespace hhash {

/// Sorted, duplicate-free label ids of one item.
using LabelSet = std::vector<std::uint32_t>;

/// n x k continuous embeddings, optionally with one label set per row.
struct EmbeddingSet {
  Matrix data;
  std::optional<std::vector<LabelSet>> labels;

  EmbeddingSet() = default;
  explicit EmbeddingSet(Matrix d, std::optional<std::vector<LabelSet>> l = std::nullopt);

  int n() const noexcept { return static_cast<int>(data.rows()); }
  int k() const noexcept { return static_cast<int>(data.cols()); }
  bool has_labels() const noexcept { return labels.has_value(); }
};

/// Sorts and deduplicates a label list in place.
void canonicalize(LabelSet& labels);

/// True iff the two sorted label sets share an element.
bool labels_intersect(const LabelSet& a, const LabelSet& b);

}  // namespace hhash
