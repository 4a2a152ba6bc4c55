#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "schubert/corpus_store.hpp"

namespace schubert::citations {

struct ArticleQuery {
  std::string title;
  std::vector<std::string> authors;
};

/// Citing article ids bucketed by the citing paper's year. Each bucket is
/// sorted ascending; an id lives in at most one bucket.
struct YearGroupedCitations {
  std::map<int, std::vector<std::string>> by_year;
  std::vector<std::string> unknown_year;

  // Diagnostics, not part of equality.
  std::uint64_t dropped_missing = 0;      ///< citing id not found in the store
  std::uint64_t earlier_than_cited = 0;   ///< citing year < cited year (data noise)

  std::size_t total_known() const;

  bool operator==(const YearGroupedCitations& o) const {
    return by_year == o.by_year && unknown_year == o.unknown_year;
  }
};

struct CitationLabel {
  std::uint64_t windowed_count = 0;
  double citation_score = 0.0;
  int pub_year = 0;
  int max_years = 0;
  int snapshot_year = 0;
};

/// ln(count + 1).
double citation_score(std::uint64_t count);

/// True iff the article has `max_years` complete calendar years of citation
/// history before the snapshot year.
bool is_eligible(int pub_year, int max_years, int snapshot_year);

/// Size of all year buckets with year <= pub_year + max_years. The
/// unknown-year bucket never counts.
std::uint64_t windowed_citation_count(const YearGroupedCitations& ygc, int pub_year,
                                      int max_years);

/// Buckets `article.in_citations` by citing-paper year.
YearGroupedCitations compute_year_grouped_citations(const corpus::CorpusStore& store,
                                                    const corpus::ArticleRecord& article);

/// First stored article whose lowercased title equals the query's, trying
/// authors in query order and candidates in ascending id order. One author
/// match suffices.
std::optional<corpus::ArticleRecord> resolve_article(const corpus::CorpusStore& store,
                                                     const ArticleQuery& query);

std::optional<std::pair<std::string, YearGroupedCitations>> find_citations_for_article(
    const corpus::CorpusStore& store, const ArticleQuery& query);

enum class LabelStatus { ok, not_found, ineligible, missing_year };

const char* to_string(LabelStatus s);

struct LabelOutcome {
  LabelStatus status = LabelStatus::not_found;
  std::optional<std::string> article_id;
  std::optional<CitationLabel> label;  ///< set iff status == ok
};

/// Resolve, check eligibility, count and score. Throws MissingYear when the
/// resolved article has no publication year.
LabelOutcome label_article(const corpus::CorpusStore& store, const ArticleQuery& query,
                           int max_years, int snapshot_year);

struct BatchSummary {
  std::uint64_t queries = 0;
  std::uint64_t ok = 0;
  std::uint64_t not_found = 0;
  std::uint64_t ineligible = 0;
  std::uint64_t missing_year = 0;
};

/// Reads a JSON-lines query file and writes one label line per query.
/// A query may carry an optional `doc_id`, which is echoed into its label.
BatchSummary label_batch(const corpus::CorpusStore& store,
                         const std::filesystem::path& queries_path,
                         const std::filesystem::path& labels_path, int max_years,
                         int snapshot_year);

}  // namespace schubert::citations
