#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hhash/embedding.hpp"
#include "hhash/householder.hpp"

namespace hhash {

/// n binary codes of k bits, packed MSB-first into ceil(k/8) bytes per row.
/// A set bit encodes +1, a clear bit -1. Pad bits past k are always zero.
class BitCodeSet {
 public:
  BitCodeSet(int n, int k);
  /// Takes ownership of packed rows; throws FormatError if a pad bit is set
  /// or the byte count does not match.
  BitCodeSet(int n, int k, std::vector<std::uint8_t> bytes);

  /// Packs a matrix of +-1 entries (anything >= 0 counts as +1).
  static BitCodeSet from_signs(const Matrix& signs);

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  int row_bytes() const noexcept { return row_bytes_; }

  std::span<const std::uint8_t> row(int i) const {
    return {bytes_.data() + static_cast<std::size_t>(i) * row_bytes_,
            static_cast<std::size_t>(row_bytes_)};
  }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  bool bit(int i, int j) const;
  void set_bit(int i, int j, bool positive);

  /// n x k matrix of +-1 values.
  Matrix unpack() const;

  friend bool operator==(const BitCodeSet&, const BitCodeSet&) = default;

 private:
  int n_;
  int k_;
  int row_bytes_;
  std::vector<std::uint8_t> bytes_;
};

/// h_i = sign(U f_i) with sign(0) = +1. No normalization is applied; a
/// missing stack means plain sign(f_i).
BitCodeSet sign_binarize(const EmbeddingSet& e, const HouseholderStack* stack = nullptr);
BitCodeSet sign_binarize(const Matrix& data, const HouseholderStack* stack = nullptr);

/// Number of differing bits among the first k. Throws DimensionError when the
/// spans differ in length.
int hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, int k);

/// Database indices sorted by (Hamming distance, cosine distance of the
/// continuous embeddings, index). Cosine distances are consulted only for
/// items sharing a Hamming distance; a zero-norm embedding there throws
/// ZeroRowError.
std::vector<int> rank_database(std::span<const std::uint8_t> query_code, const BitCodeSet& db_codes,
                               const Eigen::Ref<const Vector>& query_emb, const Matrix& db_emb);

/// As rank_database, but only the first `limit` positions are guaranteed to
/// be ranked; the returned vector has min(limit, n) entries.
std::vector<int> rank_database_top(std::span<const std::uint8_t> query_code,
                                   const BitCodeSet& db_codes,
                                   const Eigen::Ref<const Vector>& query_emb, const Matrix& db_emb,
                                   int limit);

/// AP over the first k_eval entries of a relevance list; 0 when none of them
/// is relevant.
double average_precision_at_k(std::span<const std::uint8_t> ranked_relevance, int k_eval);

struct RetrievalResult {
  std::vector<double> per_query_ap;
  double map_at_k = 0.0;
  int k_eval = 0;
};

/// mAP@k_eval of Hamming ranking with cosine tie-breaks. Item x is relevant
/// to query q iff their label sets intersect.
RetrievalResult map_at_k(const EmbeddingSet& query_emb, const BitCodeSet& query_codes,
                         const EmbeddingSet& db_emb, const BitCodeSet& db_codes, int k_eval);

}  // namespace hhash
