#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hhash/embedding.hpp"
#include "hhash/householder.hpp"
#include "hhash/retrieval.hpp"

namespace hhash {

// Binary layouts (all integers u32 little-endian, floats IEEE-754 binary32
// little-endian):
//   EMB1: "EMB1" n k, then n*k floats row-major
//   ROT1: "ROT1" k m, then m*k floats, one reflection vector after another
//   HSH1: "HSH1" n k, then n rows of ceil(k/8) bytes (MSB-first, zero pad)
// Labels are UTF-8 text, line i = comma-separated label ids of item i.

using Bytes = std::vector<std::uint8_t>;

Bytes encode_emb1(const Matrix& data);
Matrix decode_emb1(std::span<const std::uint8_t> bytes);

Bytes encode_rot1(const HouseholderStack& stack);
HouseholderStack decode_rot1(std::span<const std::uint8_t> bytes);

Bytes encode_hsh1(const BitCodeSet& codes);
BitCodeSet decode_hsh1(std::span<const std::uint8_t> bytes);

std::string encode_labels(const std::vector<LabelSet>& labels);
/// Blank lines become empty label sets. Ids are canonicalized (sorted, unique).
std::vector<LabelSet> decode_labels(std::string_view text);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Matrix read_emb1(const std::filesystem::path& path);
void write_emb1(const std::filesystem::path& path, const Matrix& data);
HouseholderStack read_rot1(const std::filesystem::path& path);
void write_rot1(const std::filesystem::path& path, const HouseholderStack& stack);
BitCodeSet read_hsh1(const std::filesystem::path& path);
void write_hsh1(const std::filesystem::path& path, const BitCodeSet& codes);
std::vector<LabelSet> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<LabelSet>& labels);

/// Loads an EMB1 file and, if `labels_path` is non-empty, its label file.
EmbeddingSet load_embedding_set(const std::filesystem::path& emb_path,
                                const std::filesystem::path& labels_path = {});

/// One-paragraph human-readable description of a file in any of the formats.
std::string describe_file(const std::filesystem::path& path);

struct SynthConfig {
  int n_per_class = 256;        ///< training points per class
  int num_classes = 8;
  int k = 16;
  double noise_sigma = 0.1;
  std::uint64_t planted_rotation_seed = 0;
  std::uint64_t sample_seed = 1;
  int query_per_class = -1;     ///< -1: max(1, n_per_class / 8)
  int database_per_class = -1;  ///< -1: 4 * query_per_class
  bool planted_rotation = true; ///< false: Q = I

  int resolved_query_per_class() const;
  int resolved_database_per_class() const;
};

struct SynthData {
  EmbeddingSet train;
  EmbeddingSet query;
  EmbeddingSet database;
  Matrix rotation;  ///< planted Q; embeddings are Q (center + noise)
  Matrix centers;   ///< num_classes x k, entries +-1
};

/// Class centers drawn without replacement from {-1,+1}^k, Gaussian noise
/// added, then every point multiplied by a fixed random orthogonal Q.
/// Throws TooManyClassesError when num_classes > 2^k.
SynthData generate_rotated_hypercube(const SynthConfig& cfg);

}  // namespace hhash
