#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schubert/chunking.hpp"

namespace schubert::dataset {

enum class InputMode { full_text, abstract_only };

const char* to_string(InputMode mode);
InputMode parse_input_mode(std::string_view text);

/// Train / validation / test proportions.
using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultRatios = {0.90, 0.05, 0.05};

struct DatasetManifest {
  SplitRatios ratios = kDefaultRatios;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  std::optional<int> max_chunks;
  InputMode mode = InputMode::full_text;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  bool operator==(const DatasetManifest&) const = default;
};

/// Seeded keyed hash that fixes each document's position in split order.
std::uint64_t split_key(std::uint64_t seed, std::string_view doc_id);

/// Sizes for n items by largest-remainder rounding (ties to the earlier split).
std::array<std::size_t, 3> largest_remainder_sizes(std::size_t n, const SplitRatios& ratios);

/// Orders ids by split_key and cuts them by cumulative ratio. Throws
/// InvalidInput on negative ratios, ratios not summing to 1, or duplicate ids.
DatasetManifest split(std::vector<std::string> doc_ids, const SplitRatios& ratios,
                      std::uint64_t seed);

/// Keeps ceil(fraction * n) training documents, chosen as a prefix of the
/// seeded hash order so smaller fractions give subsets of larger ones.
DatasetManifest subsample(const DatasetManifest& manifest, double fraction, std::uint64_t seed);

/// First min(n, max_chunks) chunk vectors. Throws InvalidInput if max_chunks < 1.
chunking::ChunkEmbeddings cap_chunks(const chunking::ChunkEmbeddings& item, int max_chunks);

struct ExampleSize {
  std::string doc_id;
  std::size_t char_count = 0;
  std::size_t chunk_count = 0;
};

struct CorpusStats {
  std::size_t examples = 0;
  double avg_chars = 0.0;
  std::size_t max_chars = 0;
  double avg_chunks = 0.0;
};

/// Throws InvalidInput on empty input.
CorpusStats corpus_stats(std::span<const ExampleSize> examples);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace schubert::dataset
