#include "schubert/dataset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "schubert/error.hpp"
#include "schubert/text_util.hpp"

namespace schubert::dataset {

const char* to_string(InputMode mode) {
  return mode == InputMode::full_text ? "full_text" : "abstract_only";
}

InputMode parse_input_mode(std::string_view text) {
  if (text == "full_text") return InputMode::full_text;
  if (text == "abstract_only") return InputMode::abstract_only;
  throw InvalidInput("unknown input mode '" + std::string(text) +
                     "' (expected full_text or abstract_only)");
}

std::uint64_t split_key(std::uint64_t seed, std::string_view doc_id) {
  return text::splitmix64(text::fnv1a64(doc_id, text::splitmix64(seed)));
}

std::array<std::size_t, 3> largest_remainder_sizes(std::size_t n, const SplitRatios& ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratios[i] * static_cast<double>(n);
    // Snap quotas within rounding noise of an integer.
    const double snapped = std::abs(quota - std::round(quota)) < 1e-9 ? std::round(quota) : quota;
    sizes[i] = static_cast<std::size_t>(std::floor(snapped));
    remainders[i] = snapped - std::floor(snapped);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> rank = {0, 1, 2};
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    ++sizes[rank[k]];
    ++assigned;
  }
  return sizes;
}

namespace {

void sort_by_key(std::vector<std::string>& ids, std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  keyed.reserve(ids.size());
  for (auto& id : ids) keyed.emplace_back(split_key(seed, id), std::move(id));
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) ids[i] = std::move(keyed[i].second);
}

}  // namespace

DatasetManifest split(std::vector<std::string> doc_ids, const SplitRatios& ratios,
                      std::uint64_t seed) {
  for (const double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw InvalidInput("split ratios must sum to 1");
  }
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : doc_ids) {
      if (!seen.insert(id).second) throw InvalidInput("duplicate doc_id in split input: " + id);
    }
  }

  sort_by_key(doc_ids, seed);
  const auto sizes = largest_remainder_sizes(doc_ids.size(), ratios);

  DatasetManifest m;
  m.ratios = ratios;
  m.seed = seed;
  auto it = doc_ids.begin();
  const auto take = [&](std::vector<std::string>& dst, std::size_t count) {
    dst.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(count)));
    it += static_cast<std::ptrdiff_t>(count);
  };
  take(m.train, sizes[0]);
  take(m.validation, sizes[1]);
  take(m.test, sizes[2]);
  return m;
}

DatasetManifest subsample(const DatasetManifest& manifest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("fraction must lie in (0, 1]");
  DatasetManifest out = manifest;
  out.fraction = manifest.fraction * fraction;
  if (fraction == 1.0) return out;

  const double exact = fraction * static_cast<double>(manifest.train.size());
  const double snapped = std::abs(exact - std::round(exact)) < 1e-9 ? std::round(exact) : exact;
  const auto keep = static_cast<std::size_t>(std::ceil(snapped));
  sort_by_key(out.train, seed);
  out.train.resize(std::min(keep, out.train.size()));
  return out;
}

chunking::ChunkEmbeddings cap_chunks(const chunking::ChunkEmbeddings& item, int max_chunks) {
  if (max_chunks < 1) throw InvalidInput("max_chunks must be >= 1");
  chunking::ChunkEmbeddings out = item;
  const std::size_t keep = std::min(item.n_chunks(), static_cast<std::size_t>(max_chunks));
  out.values.resize(keep * item.dim);
  return out;
}

CorpusStats corpus_stats(std::span<const ExampleSize> examples) {
  if (examples.empty()) throw InvalidInput("corpus statistics need at least one example");
  CorpusStats s;
  s.examples = examples.size();
  double chars = 0.0;
  double chunks = 0.0;
  for (const auto& e : examples) {
    chars += static_cast<double>(e.char_count);
    chunks += static_cast<double>(e.chunk_count);
    s.max_chars = std::max(s.max_chars, e.char_count);
  }
  s.avg_chars = chars / static_cast<double>(examples.size());
  s.avg_chunks = chunks / static_cast<double>(examples.size());
  return s;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["ratios"] = m.ratios;
  j["seed"] = m.seed;
  j["fraction"] = m.fraction;
  j["max_chunks"] = m.max_chunks ? nlohmann::ordered_json(*m.max_chunks) : nlohmann::ordered_json();
  j["mode"] = to_string(m.mode);
  j["train"] = m.train;
  j["validation"] = m.validation;
  j["test"] = m.test;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageFailure("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw StorageFailure("failed writing " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read manifest " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidInput(path.string() + " is not a JSON object");
  try {
    DatasetManifest m;
    m.ratios = j.at("ratios").get<SplitRatios>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fraction = j.at("fraction").get<double>();
    if (!j.at("max_chunks").is_null()) m.max_chunks = j.at("max_chunks").get<int>();
    m.mode = parse_input_mode(j.at("mode").get<std::string>());
    m.train = j.at("train").get<std::vector<std::string>>();
    m.validation = j.at("validation").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": malformed manifest: " + e.what());
  }
}

}  // namespace schubert::dataset
