#include "schubert/embedding_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include "schubert/error.hpp"

namespace schubert::chunking {

void write_embeddings(const std::filesystem::path& path, const std::vector<ChunkEmbeddings>& items) {
  for (const auto& item : items) {
    if (item.doc_id.size() > 0xFFFF) throw InvalidInput("doc_id longer than 65535 bytes");
    if (item.dim == 0) throw InvalidInput("item " + item.doc_id + " has dim 0");
    if (item.values.empty() || item.values.size() % item.dim != 0) {
      throw InvalidInput("item " + item.doc_id + " must hold a non-empty n_chunks x dim matrix");
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageFailure("cannot write " + path.string());
  detail::LittleEndianWriter w(out);
  w.bytes(kEmbeddingMagic, 4);
  w.u32(kEmbeddingFormatVersion);
  w.u64(items.size());
  for (const auto& item : items) {
    w.u16(static_cast<std::uint16_t>(item.doc_id.size()));
    w.bytes(item.doc_id.data(), item.doc_id.size());
    w.u32(static_cast<std::uint32_t>(item.n_chunks()));
    w.u32(item.dim);
    for (const float v : item.values) w.f32(v);
    w.u8(item.label ? 1 : 0);
    if (item.label) w.f64(*item.label);
  }
  out.flush();
  if (!out) throw StorageFailure("failed writing " + path.string());
}

std::vector<ChunkEmbeddings> read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageFailure("cannot read " + path.string());
  detail::LittleEndianReader r(in, std::filesystem::file_size(path));

  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kEmbeddingMagic, 4) != 0) {
    throw FormatError("not an SCHB embedding container (bad magic)", 0);
  }
  const auto version_at = r.offset();
  const auto version = r.u32("format version");
  if (version != kEmbeddingFormatVersion) {
    throw FormatError("unsupported SCHB version " + std::to_string(version), version_at);
  }
  const auto count = r.u64("item count");

  std::vector<ChunkEmbeddings> items;
  items.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1 << 20)));
  for (std::uint64_t k = 0; k < count; ++k) {
    ChunkEmbeddings item;
    const auto id_len = r.u16("doc_id length");
    item.doc_id.resize(id_len);
    r.bytes(item.doc_id.data(), id_len, "doc_id");
    const auto shape_at = r.offset();
    const auto n_chunks = r.u32("n_chunks");
    item.dim = r.u32("dim");
    if (n_chunks == 0 || item.dim == 0) {
      throw FormatError("item " + std::to_string(k) + " has an empty chunk matrix", shape_at);
    }
    const std::uint64_t n_values = static_cast<std::uint64_t>(n_chunks) * item.dim;
    r.require(n_values * 4, "chunk values");
    std::vector<unsigned char> raw(static_cast<std::size_t>(n_values) * 4);
    r.bytes(raw.data(), raw.size(), "chunk values");
    item.values.resize(static_cast<std::size_t>(n_values));
    for (std::size_t i = 0; i < item.values.size(); ++i) {
      const unsigned char* b = raw.data() + 4 * i;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                 (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      item.values[i] = std::bit_cast<float>(bits);
    }
    const auto flag_at = r.offset();
    const auto flag = r.u8("label flag");
    if (flag > 1) throw FormatError("label flag must be 0 or 1", flag_at);
    if (flag == 1) item.label = r.f64("label");
    items.push_back(std::move(item));
  }
  if (r.offset() != r.size()) {
    throw FormatError("trailing bytes after " + std::to_string(count) + " items", r.offset());
  }
  return items;
}

}  // namespace schubert::chunking
