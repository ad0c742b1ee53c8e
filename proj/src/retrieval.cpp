#include "hhash/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "hhash/errors.hpp"

namespace hhash {

namespace {

constexpr Eigen::Index kHashChunkRows = 4096;

std::uint8_t pad_mask(int k) {
  const int used = k % 8;
  return used == 0 ? std::uint8_t{0xFF} : static_cast<std::uint8_t>(0xFF << (8 - used));
}

void pack_signs(const Matrix& signs, Eigen::Index first_row, BitCodeSet& out) {
  for (Eigen::Index r = 0; r < signs.rows(); ++r) {
    const int i = static_cast<int>(first_row + r);
    for (Eigen::Index j = 0; j < signs.cols(); ++j) {
      if (signs(r, j) >= 0.0) out.set_bit(i, static_cast<int>(j), true);
    }
  }
}

void check_same_width(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": widths " + std::to_string(a) + " and " +
                         std::to_string(b) + " differ");
  }
}

}  // namespace

BitCodeSet::BitCodeSet(int n, int k)
    : n_(n), k_(k), row_bytes_((k + 7) / 8),
      bytes_(static_cast<std::size_t>(n) * static_cast<std::size_t>((k + 7) / 8), 0) {
  if (n < 0 || k < 1) throw DimensionError("bit code set needs n >= 0 and k >= 1");
}

BitCodeSet::BitCodeSet(int n, int k, std::vector<std::uint8_t> bytes) : BitCodeSet(n, k) {
  if (bytes.size() != bytes_.size()) {
    throw FormatError("packed code buffer has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(bytes_.size()),
                      std::min(bytes.size(), bytes_.size()));
  }
  const std::uint8_t mask = pad_mask(k);
  for (int i = 0; i < n; ++i) {
    const std::size_t last = static_cast<std::size_t>(i) * row_bytes_ + row_bytes_ - 1;
    if ((bytes[last] & static_cast<std::uint8_t>(~mask)) != 0) {
      throw FormatError("nonzero pad bits in code row " + std::to_string(i), last);
    }
  }
  bytes_ = std::move(bytes);
}

BitCodeSet BitCodeSet::from_signs(const Matrix& signs) {
  BitCodeSet out(static_cast<int>(signs.rows()), static_cast<int>(signs.cols()));
  pack_signs(signs, 0, out);
  return out;
}

bool BitCodeSet::bit(int i, int j) const {
  const auto byte = bytes_[static_cast<std::size_t>(i) * row_bytes_ + j / 8];
  return (byte >> (7 - j % 8)) & 1U;
}

void BitCodeSet::set_bit(int i, int j, bool positive) {
  auto& byte = bytes_[static_cast<std::size_t>(i) * row_bytes_ + j / 8];
  const auto mask = static_cast<std::uint8_t>(1U << (7 - j % 8));
  byte = positive ? (byte | mask) : (byte & static_cast<std::uint8_t>(~mask));
}

Matrix BitCodeSet::unpack() const {
  Matrix out(n_, k_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < k_; ++j) out(i, j) = bit(i, j) ? 1.0 : -1.0;
  return out;
}

BitCodeSet sign_binarize(const Matrix& data, const HouseholderStack* stack) {
  const auto n = data.rows();
  BitCodeSet out(static_cast<int>(n), static_cast<int>(data.cols()));
  if (stack == nullptr) {
    pack_signs(data, 0, out);
    return out;
  }
  check_same_width(stack->dim(), static_cast<int>(data.cols()), "sign_binarize");
  const Matrix ut = stack_to_matrix(*stack).transpose();
  Matrix z;
  for (Eigen::Index begin = 0; begin < n; begin += kHashChunkRows) {
    const auto rows = std::min(kHashChunkRows, n - begin);
    z.noalias() = data.middleRows(begin, rows) * ut;
    pack_signs(z, begin, out);
  }
  return out;
}

BitCodeSet sign_binarize(const EmbeddingSet& e, const HouseholderStack* stack) {
  return sign_binarize(e.data, stack);
}

int hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, int k) {
  if (a.size() != b.size()) throw DimensionError("hamming_distance: code widths differ");
  const std::size_t bytes = static_cast<std::size_t>((k + 7) / 8);
  if (bytes != a.size()) throw DimensionError("hamming_distance: k does not match code width");
  int dist = 0;
  for (std::size_t i = 0; i + 1 < bytes; ++i)
    dist += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  dist += std::popcount(static_cast<unsigned>((a[bytes - 1] ^ b[bytes - 1]) & pad_mask(k)));
  return dist;
}

std::vector<int> rank_database_top(std::span<const std::uint8_t> query_code,
                                   const BitCodeSet& db_codes,
                                   const Eigen::Ref<const Vector>& query_emb, const Matrix& db_emb,
                                   int limit) {
  const int n = db_codes.n();
  const int k = db_codes.k();
  check_same_width(static_cast<int>(query_code.size()), db_codes.row_bytes(), "rank_database");
  check_same_width(static_cast<int>(db_emb.rows()), n, "rank_database rows");
  check_same_width(static_cast<int>(query_emb.size()), static_cast<int>(db_emb.cols()),
                   "rank_database embeddings");
  limit = std::clamp(limit, 0, n);

  // Bucket by Hamming distance (0..k), keeping index order inside buckets.
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> bucket_start(static_cast<std::size_t>(k) + 2, 0);
  for (int i = 0; i < n; ++i) {
    dist[i] = hamming_distance(query_code, db_codes.row(i), k);
    ++bucket_start[static_cast<std::size_t>(dist[i]) + 1];
  }
  for (std::size_t d = 1; d < bucket_start.size(); ++d) bucket_start[d] += bucket_start[d - 1];
  std::vector<int> order(static_cast<std::size_t>(n));
  {
    std::vector<int> fill(bucket_start.begin(), bucket_start.end() - 1);
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(fill[dist[i]]++)] = i;
  }

  const double query_norm = query_emb.norm();
  std::vector<double> cosine_dist(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d <= k && bucket_start[d] < limit; ++d) {
    const int lo = bucket_start[d];
    const int hi = bucket_start[d + 1];
    if (hi - lo < 2) continue;
    if (!(query_norm > kMinVectorNorm)) throw Error("rank_database: query embedding has zero norm");
    for (int p = lo; p < hi; ++p) {
      const int i = order[p];
      const double norm = db_emb.row(i).norm();
      if (!(norm > kMinVectorNorm)) throw ZeroRowError(static_cast<std::size_t>(i));
      cosine_dist[i] = 1.0 - db_emb.row(i).dot(query_emb) / (norm * query_norm);
    }
    std::sort(order.begin() + lo, order.begin() + hi, [&](int a, int b) {
      if (cosine_dist[a] != cosine_dist[b]) return cosine_dist[a] < cosine_dist[b];
      return a < b;
    });
  }
  order.resize(static_cast<std::size_t>(limit));
  return order;
}

std::vector<int> rank_database(std::span<const std::uint8_t> query_code, const BitCodeSet& db_codes,
                               const Eigen::Ref<const Vector>& query_emb, const Matrix& db_emb) {
  return rank_database_top(query_code, db_codes, query_emb, db_emb, db_codes.n());
}

double average_precision_at_k(std::span<const std::uint8_t> ranked_relevance, int k_eval) {
  if (k_eval < 1) throw Error("average_precision_at_k: k must be >= 1");
  const std::size_t depth = std::min(ranked_relevance.size(), static_cast<std::size_t>(k_eval));
  double precision_sum = 0.0;
  int hits = 0;
  for (std::size_t j = 0; j < depth; ++j) {
    if (!ranked_relevance[j]) continue;
    ++hits;
    precision_sum += static_cast<double>(hits) / static_cast<double>(j + 1);
  }
  return hits == 0 ? 0.0 : precision_sum / hits;
}

RetrievalResult map_at_k(const EmbeddingSet& query_emb, const BitCodeSet& query_codes,
                         const EmbeddingSet& db_emb, const BitCodeSet& db_codes, int k_eval) {
  if (k_eval < 1) throw Error("map_at_k: k must be >= 1");
  if (query_emb.n() == 0) throw EmptyInputError("map_at_k: no queries");
  if (!query_emb.has_labels() || !db_emb.has_labels())
    throw MissingLabelsError("map_at_k: labels are required for queries and database");
  check_same_width(query_codes.k(), db_codes.k(), "map_at_k codes");
  check_same_width(query_emb.k(), db_emb.k(), "map_at_k embeddings");
  check_same_width(query_codes.n(), query_emb.n(), "map_at_k query rows");
  check_same_width(db_codes.n(), db_emb.n(), "map_at_k database rows");
  auto check_labels = [](const std::vector<LabelSet>& labels, const char* side) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i].empty())
        throw MissingLabelsError(std::string("map_at_k: ") + side + " item " + std::to_string(i) +
                                 " has no labels");
  };
  check_labels(*query_emb.labels, "query");
  check_labels(*db_emb.labels, "database");

  RetrievalResult result;
  result.k_eval = k_eval;
  result.per_query_ap.reserve(static_cast<std::size_t>(query_emb.n()));
  std::vector<std::uint8_t> relevance;
  for (int q = 0; q < query_emb.n(); ++q) {
    const auto ranked = rank_database_top(query_codes.row(q), db_codes,
                                          query_emb.data.row(q).transpose(), db_emb.data, k_eval);
    const LabelSet& qlabels = (*query_emb.labels)[static_cast<std::size_t>(q)];
    relevance.assign(ranked.size(), 0);
    for (std::size_t j = 0; j < ranked.size(); ++j)
      relevance[j] = labels_intersect(qlabels, (*db_emb.labels)[static_cast<std::size_t>(ranked[j])]);
    result.per_query_ap.push_back(average_precision_at_k(relevance, k_eval));
  }
  double sum = 0.0;
  for (double ap : result.per_query_ap) sum += ap;
  result.map_at_k = sum / static_cast<double>(result.per_query_ap.size());
  return result;
}

}  // namespace hhash
