#include "hhash/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "hhash/errors.hpp"
#include "hhash/random.hpp"

namespace hhash {

namespace {

constexpr std::size_t kHeaderBytes = 12;

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

double get_f32(std::span<const std::uint8_t> b, std::size_t off) {
  const float f = std::bit_cast<float>(get_u32(b, off));
  if (!std::isfinite(f)) throw FormatError("non-finite float", off);
  return static_cast<double>(f);
}

std::uint32_t checked_u32(Eigen::Index v, const char* what) {
  if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<std::uint32_t>::max())
    throw DimensionError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

void write_header(Bytes& out, const char* magic, std::uint32_t a, std::uint32_t b) {
  out.insert(out.end(), magic, magic + 4);
  put_u32(out, a);
  put_u32(out, b);
}

// Validates magic and header, returns the two header integers.
std::pair<std::uint32_t, std::uint32_t> read_header(std::span<const std::uint8_t> b,
                                                    const char* magic) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= b.size()) throw FormatError(std::string("truncated ") + magic + " magic", b.size());
    if (b[i] != static_cast<std::uint8_t>(magic[i]))
      throw FormatError(std::string("bad magic, expected ") + magic, 0);
  }
  if (b.size() < kHeaderBytes) throw FormatError(std::string("truncated ") + magic + " header", b.size());
  return {get_u32(b, 4), get_u32(b, 8)};
}

// Checks that the payload of `count` items of `item_bytes` exactly fills the buffer.
void check_payload(std::span<const std::uint8_t> b, std::uint64_t count, std::uint64_t item_bytes,
                   std::size_t count_offset) {
  if (item_bytes != 0 &&
      count > (std::numeric_limits<std::uint64_t>::max() - kHeaderBytes) / item_bytes)
    throw FormatError("element count overflow", count_offset);
  const std::uint64_t expected = kHeaderBytes + count * item_bytes;
  if (b.size() < expected) throw FormatError("truncated payload", b.size());
  if (b.size() > expected) throw FormatError("trailing bytes after payload", expected);
}

void check_index_range(std::uint32_t v, std::size_t off) {
  if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw FormatError("count exceeds supported range", off);
}

}  // namespace

Bytes encode_emb1(const Matrix& data) {
  Bytes out;
  out.reserve(kHeaderBytes + static_cast<std::size_t>(data.size()) * 4);
  write_header(out, "EMB1", checked_u32(data.rows(), "row count"), checked_u32(data.cols(), "width"));
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j) put_f32(out, data(i, j));
  return out;
}

Matrix decode_emb1(std::span<const std::uint8_t> bytes) {
  const auto [n, k] = read_header(bytes, "EMB1");
  if (k == 0) throw FormatError("EMB1 width k = 0", 8);
  check_index_range(n, 4);
  check_index_range(k, 8);
  check_payload(bytes, static_cast<std::uint64_t>(n) * k, 4, 4);
  Matrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  std::size_t off = kHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < k; ++j, off += 4) data(i, j) = get_f32(bytes, off);
  return data;
}

Bytes encode_rot1(const HouseholderStack& stack) {
  Bytes out;
  write_header(out, "ROT1", checked_u32(stack.dim(), "dimension"), checked_u32(stack.size(), "size"));
  for (int i = 0; i < stack.size(); ++i)
    for (int j = 0; j < stack.dim(); ++j) put_f32(out, stack.vectors()(i, j));
  return out;
}

HouseholderStack decode_rot1(std::span<const std::uint8_t> bytes) {
  const auto [k, m] = read_header(bytes, "ROT1");
  if (k == 0) throw FormatError("ROT1 dimension k = 0", 4);
  if (m > k) throw FormatError("ROT1 has more reflections than dimensions", 8);
  check_index_range(k, 4);
  check_payload(bytes, static_cast<std::uint64_t>(m) * k, 4, 8);
  Matrix vectors(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  std::size_t off = kHeaderBytes;
  for (std::uint32_t i = 0; i < m; ++i) {
    const std::size_t row_off = off;
    for (std::uint32_t j = 0; j < k; ++j, off += 4) vectors(i, j) = get_f32(bytes, off);
    if (!(vectors.row(i).norm() > kMinVectorNorm))
      throw FormatError("degenerate reflection vector " + std::to_string(i), row_off);
  }
  return HouseholderStack(std::move(vectors));
}

Bytes encode_hsh1(const BitCodeSet& codes) {
  Bytes out;
  out.reserve(kHeaderBytes + codes.bytes().size());
  write_header(out, "HSH1", checked_u32(codes.n(), "row count"), checked_u32(codes.k(), "width"));
  out.insert(out.end(), codes.bytes().begin(), codes.bytes().end());
  return out;
}

BitCodeSet decode_hsh1(std::span<const std::uint8_t> bytes) {
  const auto [n, k] = read_header(bytes, "HSH1");
  if (k == 0) throw FormatError("HSH1 width k = 0", 8);
  check_index_range(n, 4);
  check_index_range(k, 8);
  const std::uint64_t row_bytes = (static_cast<std::uint64_t>(k) + 7) / 8;
  check_payload(bytes, n, row_bytes, 4);
  Bytes payload(bytes.begin() + kHeaderBytes, bytes.end());
  try {
    return BitCodeSet(static_cast<int>(n), static_cast<int>(k), std::move(payload));
  } catch (const FormatError& e) {
    throw FormatError("HSH1 nonzero pad bits", kHeaderBytes + e.offset());
  }
}

std::string encode_labels(const std::vector<LabelSet>& labels) {
  std::string out;
  for (const auto& set : labels) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i) out.push_back(',');
      out += std::to_string(set[i]);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<LabelSet> decode_labels(std::string_view text) {
  std::vector<LabelSet> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    LabelSet set;
    const bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
    std::size_t tok = 0;
    while (!blank && tok <= line.size()) {
      std::size_t comma = line.find(',', tok);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view field = line.substr(tok, comma - tok);
      const std::size_t lead = field.find_first_not_of(" \t");
      const std::size_t field_off = pos + tok + (lead == std::string_view::npos ? 0 : lead);
      if (lead == std::string_view::npos) throw FormatError("empty label id", field_off);
      field = field.substr(lead, field.find_last_not_of(" \t") - lead + 1);
      std::uint32_t id = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), id);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("invalid label id '" + std::string(field) + "'", field_off);
      set.push_back(id);
      tok = comma + 1;
    }
    canonicalize(set);
    out.push_back(std::move(set));
    pos = end + 1;
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

Matrix read_emb1(const std::filesystem::path& path) { return decode_emb1(read_file(path)); }
void write_emb1(const std::filesystem::path& path, const Matrix& data) { write_file(path, encode_emb1(data)); }
HouseholderStack read_rot1(const std::filesystem::path& path) { return decode_rot1(read_file(path)); }
void write_rot1(const std::filesystem::path& path, const HouseholderStack& stack) {
  write_file(path, encode_rot1(stack));
}
BitCodeSet read_hsh1(const std::filesystem::path& path) { return decode_hsh1(read_file(path)); }
void write_hsh1(const std::filesystem::path& path, const BitCodeSet& codes) {
  write_file(path, encode_hsh1(codes));
}

std::vector<LabelSet> read_labels(const std::filesystem::path& path) {
  const Bytes raw = read_file(path);
  return decode_labels(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

void write_labels(const std::filesystem::path& path, const std::vector<LabelSet>& labels) {
  const std::string text = encode_labels(labels);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

EmbeddingSet load_embedding_set(const std::filesystem::path& emb_path,
                                const std::filesystem::path& labels_path) {
  Matrix data = read_emb1(emb_path);
  if (labels_path.empty()) return EmbeddingSet(std::move(data));
  return EmbeddingSet(std::move(data), read_labels(labels_path));
}

std::string describe_file(const std::filesystem::path& path) {
  const Bytes raw = read_file(path);
  std::ostringstream os;
  os << path.string() << ": " << raw.size() << " bytes\n";
  const std::string magic(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, raw.size())));
  if (magic == "EMB1") {
    const Matrix m = decode_emb1(raw);
    os << "format: EMB1 (embeddings)\nn: " << m.rows() << "\nk: " << m.cols() << "\n";
  } else if (magic == "ROT1") {
    const HouseholderStack s = decode_rot1(raw);
    os << "format: ROT1 (householder rotation)\nk: " << s.dim() << "\nm: " << s.size()
       << "\northogonality_error: " << orthogonality_error(stack_to_matrix(s)) << "\n";
  } else if (magic == "HSH1") {
    const BitCodeSet c = decode_hsh1(raw);
    os << "format: HSH1 (hash codes)\nn: " << c.n() << "\nk: " << c.k()
       << "\nrow_bytes: " << c.row_bytes() << "\n";
  } else {
    const auto labels = decode_labels(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
    std::size_t blank = 0;
    std::set<std::uint32_t> ids;
    for (const auto& s : labels) {
      if (s.empty()) ++blank;
      ids.insert(s.begin(), s.end());
    }
    os << "format: labels (text)\nitems: " << labels.size() << "\ndistinct_labels: " << ids.size()
       << "\nunlabeled_items: " << blank << "\n";
  }
  return os.str();
}

int SynthConfig::resolved_query_per_class() const {
  return query_per_class >= 0 ? query_per_class : std::max(1, n_per_class / 8);
}

int SynthConfig::resolved_database_per_class() const {
  return database_per_class >= 0 ? database_per_class : 4 * resolved_query_per_class();
}

SynthData generate_rotated_hypercube(const SynthConfig& cfg) {
  if (cfg.k < 1 || cfg.num_classes < 1 || cfg.n_per_class < 0 || cfg.noise_sigma < 0 ||
      !std::isfinite(cfg.noise_sigma))
    throw Error("invalid synthetic dataset configuration");
  if (cfg.k < 31 && cfg.num_classes > (1 << cfg.k))
    throw TooManyClassesError("cannot draw " + std::to_string(cfg.num_classes) +
                              " distinct codes of " + std::to_string(cfg.k) + " bits");

  SynthData out;
  Rng rot_rng(cfg.planted_rotation_seed);
  out.rotation = cfg.planted_rotation ? random_orthogonal(cfg.k, rot_rng) : Matrix::Identity(cfg.k, cfg.k);

  Rng rng(cfg.sample_seed);
  std::bernoulli_distribution coin(0.5);
  std::set<std::vector<bool>> seen;
  out.centers.resize(cfg.num_classes, cfg.k);
  for (int c = 0; c < cfg.num_classes;) {
    std::vector<bool> code(static_cast<std::size_t>(cfg.k));
    for (int j = 0; j < cfg.k; ++j) code[j] = coin(rng);
    if (!seen.insert(code).second) continue;
    for (int j = 0; j < cfg.k; ++j) out.centers(c, j) = code[j] ? 1.0 : -1.0;
    ++c;
  }

  const Matrix qt = out.rotation.transpose();
  auto make_split = [&](int per_class) {
    const int total = per_class * cfg.num_classes;
    std::vector<int> cls(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) cls[i] = i / per_class;
    std::shuffle(cls.begin(), cls.end(), rng);
    Matrix points(total, cfg.k);
    std::vector<LabelSet> labels(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
      points.row(i) = out.centers.row(cls[i]);
      if (cfg.noise_sigma > 0) points.row(i) += cfg.noise_sigma * gaussian_vector(cfg.k, rng).transpose();
      labels[i] = {static_cast<std::uint32_t>(cls[i])};
    }
    // Row form of f = Q x.
    return EmbeddingSet(points * qt, std::move(labels));
  };
  out.train = make_split(cfg.n_per_class);
  out.query = make_split(cfg.resolved_query_per_class());
  out.database = make_split(cfg.resolved_database_per_class());
  return out;
}

}  // namespace hhash
