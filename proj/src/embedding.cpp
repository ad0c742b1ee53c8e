#include "hhash/embedding.hpp"

#include <algorithm>

#include "hhash/errors.hpp"

namespace hhash {

EmbeddingSet::EmbeddingSet(Matrix d, std::optional<std::vector<LabelSet>> l)
    : data(std::move(d)), labels(std::move(l)) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != data.rows()) {
    throw DimensionError("label count " + std::to_string(labels->size()) +
                         " does not match row count " + std::to_string(data.rows()));
  }
}

void canonicalize(LabelSet& labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

bool labels_intersect(const LabelSet& a, const LabelSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

}  // namespace hhash
