#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <json.hpp>

#include "schubert/text_util.hpp"

namespace schubert::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  const auto stamp = std::to_string(::getpid()) + "-" + std::to_string(counter++);
  path_ = fs::temp_directory_path() / ("schubert-test-" + stamp);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string to_dump_line(const corpus::ArticleRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.article_id;
  j["title"] = r.title;
  auto authors = nlohmann::ordered_json::array();
  for (const auto& a : r.authors) authors.push_back({{"name", a}, {"ids", {"0"}}});
  j["authors"] = authors;
  if (r.year) j["year"] = *r.year;
  j["inCitations"] = r.in_citations;
  j["outCitations"] = r.out_citations;
  if (r.journal) j["journalName"] = *r.journal;
  if (r.volume) j["journalVolume"] = *r.volume;
  if (r.pages) j["journalPages"] = *r.pages;
  if (r.doi) j["doi"] = *r.doi;
  return j.dump();
}

std::string synthetic_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%07zx", static_cast<std::size_t>(i * 2654435761ULL % 0x10000000ULL));
  return buf;
}

namespace {

constexpr const char* kGiven[] = {"Anna", "Émile", "Zoë", "Jürgen", "Ana", "Ольга",
                                  "Νίκος", "Li", "Łukasz", "Ruth"};
constexpr const char* kFamily[] = {"Smith", "Ölund", "Müller", "GARCÍA", "Петров",
                                   "Παπαδόπουλος", "Wang", "Dvořák", "Kim", "O'Neil"};
constexpr const char* kWords[] = {"Neural", "Citation", "Graph", "Language", "Models",
                                  "Über", "Learning", "Sparse", "Bayesian", "Parsing",
                                  "Representations", "ΔEncoding", "Attention", "Corpus"};

}  // namespace

std::string synthetic_author(std::size_t k) {
  return std::string(kGiven[k % 10]) + " " + kFamily[(k / 10) % 10] + " " + std::to_string(k / 100);
}

std::string synthetic_title(std::size_t k) {
  std::string t;
  std::uint64_t h = text::splitmix64(k);
  for (int w = 0; w < 4; ++w) {
    if (w) t += ' ';
    t += kWords[h % 14];
    h /= 14;
  }
  return t + " " + std::to_string(k);
}

corpus::ArticleRecord synthetic_record(std::uint64_t seed, std::size_t i, const CorpusSpec& spec) {
  Rng rng(text::splitmix64(seed * 0x9E3779B97F4A7C15ULL + i));
  corpus::ArticleRecord r;
  r.article_id = synthetic_id(i);
  r.title = synthetic_title(rng.below(spec.title_pool));
  if (rng.uniform() < 0.3) r.title = text::to_lower(r.title);
  const auto n_authors = 1 + rng.below(4);
  for (std::uint64_t a = 0; a < n_authors; ++a) {
    const auto name = synthetic_author(rng.below(spec.author_pool));
    if (std::find(r.authors.begin(), r.authors.end(), name) == r.authors.end()) r.authors.push_back(name);
  }
  if (rng.uniform() >= spec.missing_year_rate) r.year = 1990 + static_cast<int>(rng.below(31));
  const auto n_cites = rng.below(spec.max_citations + 1);
  const auto id_space = static_cast<std::uint64_t>(static_cast<double>(spec.records) *
                                                   (1.0 + spec.dangling_citation_rate)) + 1;
  for (std::uint64_t c = 0; c < n_cites; ++c) {
    auto id = synthetic_id(rng.below(id_space));
    if (id != r.article_id && std::find(r.in_citations.begin(), r.in_citations.end(), id) == r.in_citations.end()) {
      r.in_citations.push_back(std::move(id));
    }
  }
  if (rng.uniform() < 0.5) {
    r.journal = "Journal " + std::to_string(rng.below(20));
    r.volume = std::to_string(1 + rng.below(40));
    r.pages = std::to_string(rng.below(300)) + "-" + std::to_string(300 + rng.below(300));
  }
  if (rng.uniform() < 0.5) r.doi = "10.1000/" + r.article_id;
  return r;
}

std::vector<corpus::ArticleRecord> synthetic_corpus(std::uint64_t seed, const CorpusSpec& spec) {
  std::vector<corpus::ArticleRecord> out;
  out.reserve(spec.records);
  for (std::size_t i = 0; i < spec.records; ++i) out.push_back(synthetic_record(seed, i, spec));
  return out;
}

std::vector<citations::ArticleQuery> synthetic_queries(const std::vector<corpus::ArticleRecord>& records,
                                                       std::size_t count, std::uint64_t seed,
                                                       const CorpusSpec& spec) {
  Rng rng(seed);
  std::vector<citations::ArticleQuery> out;
  for (std::size_t q = 0; q < count; ++q) {
    const auto& r = records[rng.below(records.size())];
    citations::ArticleQuery query;
    switch (q % 5) {
      case 0:  // exact hit
        query = {r.title, r.authors};
        break;
      case 1:  // case variant, one real author among strangers
        query.title = text::to_lower(r.title);
        query.authors = {synthetic_author(rng.below(spec.author_pool)),
                         r.authors[rng.below(r.authors.size())],
                         synthetic_author(rng.below(spec.author_pool))};
        break;
      case 2:  // title that never occurs
        query = {"Unseen Title " + std::to_string(q), r.authors};
        break;
      case 3:  // author nobody has
        query = {r.title, {"Nobody Anywhere " + std::to_string(q)}};
        break;
      default:  // a pooled title with random authors: hits only by chance
        query.title = synthetic_title(rng.below(spec.title_pool));
        query.authors = {synthetic_author(rng.below(spec.author_pool)),
                         synthetic_author(rng.below(spec.author_pool))};
        break;
    }
    out.push_back(std::move(query));
  }
  return out;
}

std::optional<std::pair<std::string, citations::YearGroupedCitations>> linear_scan_find(
    const std::vector<corpus::ArticleRecord>& records, const citations::ArticleQuery& query) {
  std::map<std::string, const corpus::ArticleRecord*> by_id;
  for (const auto& r : records) by_id[r.article_id] = &r;  // last copy wins

  const auto title = text::to_lower(query.title);
  const corpus::ArticleRecord* hit = nullptr;
  for (const auto& raw_author : query.authors) {
    const auto author = text::to_lower(raw_author);
    for (const auto& [id, r] : by_id) {
      if (text::to_lower(r->title) != title) continue;
      const bool has_author = std::any_of(r->authors.begin(), r->authors.end(),
                                          [&](const std::string& a) { return text::to_lower(a) == author; });
      if (has_author) {
        hit = r;
        break;
      }
    }
    if (hit) break;
  }
  if (!hit) return std::nullopt;

  citations::YearGroupedCitations ygc;
  std::set<std::string> seen;
  for (const auto& c : hit->in_citations) {
    if (!seen.insert(c).second) continue;
    const auto it = by_id.find(c);
    if (it == by_id.end()) {
      ++ygc.dropped_missing;
      continue;
    }
    const auto year = corpus::sanitize_year(it->second->year);
    if (year) {
      ygc.by_year[*year].push_back(c);
    } else {
      ygc.unknown_year.push_back(c);
    }
  }
  for (auto& [y, ids] : ygc.by_year) std::sort(ids.begin(), ids.end());
  std::sort(ygc.unknown_year.begin(), ygc.unknown_year.end());
  return std::pair{hit->article_id, ygc};
}

std::vector<std::pair<std::size_t, std::size_t>> brute_force_windows(std::size_t n,
                                                                     std::size_t chunk_size,
                                                                     std::size_t overlap) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = std::min(n, start + chunk_size);
    out.emplace_back(start, end);
    if (end == n) break;
    start += chunk_size - overlap;
  }
  return out;
}

std::string random_text(Rng& rng, std::size_t n) {
  static constexpr const char* kVocab[] = {"the", "model", "Citation", "graph", "über", "A",
                                           "ΣΟΦΙΑ", "data", "of", "learning", "x", "42"};
  static constexpr const char* kSpace[] = {" ", "  ", "\n", "\t", "  "};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += kSpace[rng.below(5)];
    out += kVocab[rng.below(12)];
  }
  return out;
}

chunking::ChunkEmbeddings random_item(Rng& rng, std::size_t index) {
  chunking::ChunkEmbeddings item;
  item.doc_id = "doc-" + std::to_string(index) + (rng.uniform() < 0.2 ? "-Ωμέγα" : "");
  item.dim = static_cast<std::uint32_t>(1 + rng.below(32));
  const auto n = 1 + rng.below(6);
  item.values.resize(n * item.dim);
  for (auto& v : item.values) {
    // Arbitrary bit patterns (excluding NaN) so every mantissa bit round-trips.
    std::uint32_t bits = 0;
    float f = 0.0f;
    do {
      bits = static_cast<std::uint32_t>(rng.next());
      std::memcpy(&f, &bits, sizeof f);
    } while (std::isnan(f));
    v = f;
  }
  if (rng.uniform() < 0.7) item.label = (rng.uniform() - 0.5) * 1e3;
  return item;
}

std::vector<chunking::ChunkEmbeddings> pseudo_documents(std::size_t count, std::size_t min_tokens,
                                                        std::size_t max_tokens, std::size_t chunk_size,
                                                        std::size_t overlap, std::size_t dim,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<chunking::ChunkEmbeddings> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = min_tokens + rng.below(max_tokens - min_tokens + 1);
    out.push_back(chunking::embed_document_pseudo("doc" + std::to_string(i), random_text(rng, n),
                                                  chunk_size, overlap, dim));
  }
  return out;
}

double mean_component(const chunking::ChunkEmbeddings& item) {
  double s = 0.0;
  for (const float v : item.values) s += v;
  return s / static_cast<double>(item.values.size());
}

model::GruParams random_params(Eigen::Index dim_in, Eigen::Index hidden, Rng& rng, double scale) {
  auto p = model::GruParams::zeros(dim_in, hidden);
  for (auto t : p.tensors()) {
    for (auto& x : t) x = (2.0 * rng.uniform() - 1.0) * scale;
  }
  return p;
}

GradientCheck check_gradients(const model::GruParams& params, const std::vector<model::Matrix>& inputs,
                              const std::vector<double>& labels, double dropout_p,
                              std::uint64_t mask_seed, double step) {
  const auto run = [&](const model::GruParams& p) {
    Rng rng(mask_seed);
    std::vector<model::ForwardCache> caches;
    for (const auto& x : inputs) caches.push_back(model::forward(p, x, model::Mode::train, dropout_p, rng));
    return caches;
  };

  const auto caches = run(params);
  const auto analytic = model::backward(params, caches, labels);

  GradientCheck out;
  model::GruParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    for (std::size_t k = 0; k < probe_tensors[t].size(); ++k) {
      double& x = probe_tensors[t][k];
      const double saved = x;
      x = saved + step;
      const double up = model::mae_loss(run(probe), labels);
      x = saved - step;
      const double down = model::mae_loss(run(probe), labels);
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grad_tensors[t][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / denom);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace schubert::testing
