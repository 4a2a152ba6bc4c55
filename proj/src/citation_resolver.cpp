#include "schubert/citation_resolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "schubert/error.hpp"
#include "schubert/text_util.hpp"

namespace schubert::citations {

using corpus::ArticleRecord;
using corpus::CorpusStore;

std::size_t YearGroupedCitations::total_known() const {
  std::size_t n = 0;
  for (const auto& [year, ids] : by_year) n += ids.size();
  return n;
}

double citation_score(std::uint64_t count) {
  return std::log1p(static_cast<double>(count));
}

bool is_eligible(int pub_year, int max_years, int snapshot_year) {
  return static_cast<long long>(pub_year) + max_years <= static_cast<long long>(snapshot_year) - 1;
}

std::uint64_t windowed_citation_count(const YearGroupedCitations& ygc, int pub_year,
                                      int max_years) {
  const long long last = static_cast<long long>(pub_year) + max_years;
  std::uint64_t n = 0;
  for (const auto& [year, ids] : ygc.by_year) {
    if (year > last) break;
    n += ids.size();
  }
  return n;
}

YearGroupedCitations compute_year_grouped_citations(const CorpusStore& store,
                                                    const ArticleRecord& article) {
  YearGroupedCitations out;
  for (const auto& citing : article.in_citations) {
    const auto year = store.lookup_year(citing);
    if (!year) {
      ++out.dropped_missing;
      continue;
    }
    if (!*year) {
      out.unknown_year.push_back(citing);
      continue;
    }
    if (article.year && **year < *article.year) ++out.earlier_than_cited;
    out.by_year[**year].push_back(citing);
  }
  // in_citations is duplicate-free, so sorting keeps buckets disjoint.
  for (auto& [year, ids] : out.by_year) std::sort(ids.begin(), ids.end());
  std::sort(out.unknown_year.begin(), out.unknown_year.end());
  return out;
}

std::optional<ArticleRecord> resolve_article(const CorpusStore& store, const ArticleQuery& query) {
  if (query.title.empty()) throw InvalidInput("query title must be non-empty");
  if (query.authors.empty()) throw InvalidInput("query authors must be non-empty");

  const std::string title = text::to_lower(query.title);
  for (const auto& author : query.authors) {
    for (const auto& id : store.lookup_by_author(author)) {
      auto article = store.lookup_by_id(id);
      if (article && text::to_lower(article->title) == title) return article;
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::string, YearGroupedCitations>> find_citations_for_article(
    const CorpusStore& store, const ArticleQuery& query) {
  auto article = resolve_article(store, query);
  if (!article) return std::nullopt;
  auto ygc = compute_year_grouped_citations(store, *article);
  return std::pair{article->article_id, std::move(ygc)};
}

const char* to_string(LabelStatus s) {
  switch (s) {
    case LabelStatus::ok: return "ok";
    case LabelStatus::not_found: return "not_found";
    case LabelStatus::ineligible: return "ineligible";
    case LabelStatus::missing_year: return "missing_year";
  }
  return "unknown";
}

LabelOutcome label_article(const CorpusStore& store, const ArticleQuery& query, int max_years,
                           int snapshot_year) {
  if (max_years < 1) throw InvalidInput("max_years must be positive");
  LabelOutcome out;
  const auto article = resolve_article(store, query);
  if (!article) {
    out.status = LabelStatus::not_found;
    return out;
  }
  out.article_id = article->article_id;
  if (!article->year) {
    throw MissingYear("resolved article " + article->article_id + " has no publication year");
  }
  const int pub_year = *article->year;
  if (!is_eligible(pub_year, max_years, snapshot_year)) {
    out.status = LabelStatus::ineligible;
    return out;
  }
  const auto ygc = compute_year_grouped_citations(store, *article);
  CitationLabel label;
  label.windowed_count = windowed_citation_count(ygc, pub_year, max_years);
  label.citation_score = citation_score(label.windowed_count);
  label.pub_year = pub_year;
  label.max_years = max_years;
  label.snapshot_year = snapshot_year;
  out.status = LabelStatus::ok;
  out.label = label;
  return out;
}

BatchSummary label_batch(const CorpusStore& store, const std::filesystem::path& queries_path,
                         const std::filesystem::path& labels_path, int max_years,
                         int snapshot_year) {
  using nlohmann::json;
  std::ifstream in(queries_path);
  if (!in) throw InvalidInput("cannot read query file " + queries_path.string());
  std::ofstream out(labels_path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageFailure("cannot write label file " + labels_path.string());

  BatchSummary summary;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const json q = json::parse(line, nullptr, false);
    const auto where = queries_path.string() + ":" + std::to_string(line_no);
    if (q.is_discarded() || !q.is_object()) throw InvalidInput(where + ": not a JSON object");
    if (!q.contains("title") || !q["title"].is_string() || !q.contains("authors") ||
        !q["authors"].is_array()) {
      throw InvalidInput(where + ": query needs string `title` and array `authors`");
    }
    ArticleQuery query;
    query.title = q["title"].get<std::string>();
    for (const auto& a : q["authors"]) {
      if (a.is_string()) query.authors.push_back(a.get<std::string>());
    }

    nlohmann::ordered_json rec;
    rec["query_index"] = summary.queries;
    if (q.contains("doc_id") && q["doc_id"].is_string()) rec["doc_id"] = q["doc_id"].get<std::string>();

    LabelOutcome outcome;
    try {
      outcome = label_article(store, query, max_years, snapshot_year);
    } catch (const MissingYear&) {
      outcome.status = LabelStatus::missing_year;
      outcome.article_id = resolve_article(store, query)->article_id;
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + ": " + e.what());
    }

    if (outcome.article_id) {
      rec["article_id"] = *outcome.article_id;
    } else {
      rec["article_id"] = nullptr;
    }
    if (outcome.label) {
      rec["count"] = outcome.label->windowed_count;
      rec["score"] = outcome.label->citation_score;
    } else {
      rec["count"] = nullptr;
      rec["score"] = nullptr;
    }
    rec["status"] = to_string(outcome.status);
    out << rec.dump() << '\n';

    ++summary.queries;
    switch (outcome.status) {
      case LabelStatus::ok: ++summary.ok; break;
      case LabelStatus::not_found: ++summary.not_found; break;
      case LabelStatus::ineligible: ++summary.ineligible; break;
      case LabelStatus::missing_year: ++summary.missing_year; break;
    }
  }
  if (!out) throw StorageFailure("failed writing " + labels_path.string());
  return summary;
}

}  // namespace schubert::citations
