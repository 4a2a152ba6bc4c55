#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "schubert/citation_resolver.hpp"
#include "schubert/error.hpp"
#include "support.hpp"

using namespace schubert;
using namespace schubert::citations;
using corpus::ArticleRecord;
using schubert::testing::TempDir;

namespace {

// Cited paper P (2015) with citers in several years, one without a year and
// one that is not in the store.
std::vector<ArticleRecord> worked_example() {
  return {
      {.article_id = "P", .title = "Deep Nets", .authors = {"Alice Smith", "Bob Jones"}, .year = 2015,
       .in_citations = {"c2016a", "c2016b", "c2018", "c2019", "cnoyear", "cmissing", "c2014"}},
      {.article_id = "c2016a", .title = "x", .authors = {"z"}, .year = 2016},
      {.article_id = "c2016b", .title = "x", .authors = {"z"}, .year = 2016},
      {.article_id = "c2018", .title = "x", .authors = {"z"}, .year = 2018},
      {.article_id = "c2019", .title = "x", .authors = {"z"}, .year = 2019},
      {.article_id = "c2014", .title = "x", .authors = {"z"}, .year = 2014},
      {.article_id = "cnoyear", .title = "x", .authors = {"z"}},
      {.article_id = "Q", .title = "No Year Paper", .authors = {"Carol"}},
      {.article_id = "R", .title = "Fresh", .authors = {"Carol"}, .year = 2019},
      // Same title and author as P under a larger id: P must win the tie.
      {.article_id = "Z", .title = "DEEP NETS", .authors = {"Bob Jones"}, .year = 2010},
      {.article_id = "A0", .title = "Deep Nets", .authors = {"Dana"}, .year = 2011},
  };
}

}  // namespace

TEST_CASE("citation score is ln(count + 1)") {
  CHECK(citation_score(0) == 0.0);
  CHECK(std::abs(citation_score(1) - 0.6931471805599453) <= 1e-15);
  CHECK(std::abs(citation_score(7) - 2.0794415416798357) <= 1e-15);
  double prev = -1.0;
  for (std::uint64_t c = 0; c < 2000; ++c) {
    const double s = citation_score(c);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("eligibility window") {
  CHECK(is_eligible(2016, 3, 2020));
  CHECK_FALSE(is_eligible(2017, 3, 2020));
  CHECK(is_eligible(2018, 1, 2020));
  CHECK_FALSE(is_eligible(2019, 1, 2020));
  CHECK(is_eligible(1990, 30, 2021));
}

TEST_CASE("year grouping and windowed counts on a worked example") {
  TempDir dir;
  const auto records = worked_example();
  const auto store = corpus::build_store(records, dir / "s.db");
  const auto found = find_citations_for_article(store, {"deep nets", {"ALICE SMITH"}});
  REQUIRE(found.has_value());
  CHECK(found->first == "P");
  const auto& ygc = found->second;
  CHECK(ygc.by_year.at(2016) == std::vector<std::string>{"c2016a", "c2016b"});
  CHECK(ygc.by_year.at(2014) == std::vector<std::string>{"c2014"});
  CHECK(ygc.unknown_year == std::vector<std::string>{"cnoyear"});
  CHECK(ygc.dropped_missing == 1);
  CHECK(ygc.earlier_than_cited == 1);
  CHECK(ygc.total_known() == 5);

  CHECK(windowed_citation_count(ygc, 2015, 1) == 3);  // 2014 + two in 2016
  CHECK(windowed_citation_count(ygc, 2015, 3) == 4);
  CHECK(windowed_citation_count(ygc, 2015, 4) == 5);
  CHECK(windowed_citation_count(ygc, 2015, 0) == 1);
}

TEST_CASE("windowed count is monotone and bounded") {
  TempDir dir;
  const auto records = schubert::testing::synthetic_corpus(5, {.records = 400});
  const auto store = corpus::build_store(records, dir / "s.db");
  for (const auto& r : records) {
    const auto article = *store.lookup_by_id(r.article_id);
    const auto ygc = compute_year_grouped_citations(store, article);
    const std::size_t bucketed = ygc.total_known() + ygc.unknown_year.size() + ygc.dropped_missing;
    CHECK(bucketed == article.in_citations.size());
    std::uint64_t prev = 0;
    for (int w = 0; w <= 35; ++w) {
      const auto c = windowed_citation_count(ygc, 1990, w);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(prev == ygc.total_known());
  }
}

TEST_CASE("resolution order: query authors first, then ascending id") {
  TempDir dir;
  const auto store = corpus::build_store(worked_example(), dir / "s.db");
  CHECK(resolve_article(store, {"Deep Nets", {"bob jones"}})->article_id == "P");
  CHECK(resolve_article(store, {"Deep Nets", {"dana", "bob jones"}})->article_id == "A0");
  CHECK(resolve_article(store, {"Deep Nets", {"nobody", "bob jones"}})->article_id == "P");
  CHECK_FALSE(resolve_article(store, {"Deep Nets", {"carol"}}).has_value());
  CHECK_FALSE(resolve_article(store, {"Deep Nets ", {"alice smith"}}).has_value());
  CHECK_THROWS_AS(resolve_article(store, {"", {"x"}}), InvalidInput);
  CHECK_THROWS_AS(resolve_article(store, {"t", {}}), InvalidInput);
}

TEST_CASE("label_article statuses") {
  TempDir dir;
  const auto store = corpus::build_store(worked_example(), dir / "s.db");
  const auto ok = label_article(store, {"Deep Nets", {"Alice Smith"}}, 3, 2020);
  CHECK(ok.status == LabelStatus::ok);
  REQUIRE(ok.label.has_value());
  CHECK(ok.label->windowed_count == 4);
  CHECK(ok.label->citation_score == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(ok.label->pub_year == 2015);

  const auto fresh = label_article(store, {"Fresh", {"Carol"}}, 3, 2020);
  CHECK(fresh.status == LabelStatus::ineligible);
  CHECK(fresh.article_id == "R");
  CHECK_FALSE(fresh.label.has_value());

  CHECK(label_article(store, {"Nope", {"Carol"}}, 3, 2020).status == LabelStatus::not_found);
  CHECK_THROWS_AS(label_article(store, {"No Year Paper", {"Carol"}}, 3, 2020), MissingYear);
  CHECK_THROWS_AS(label_article(store, {"Fresh", {"Carol"}}, 0, 2020), InvalidInput);
}

TEST_CASE("label_batch writes one line per query") {
  TempDir dir;
  const auto store = corpus::build_store(worked_example(), dir / "s.db");
  schubert::testing::write_text(dir / "q.jsonl",
                                R"({"title":"Deep Nets","authors":["Alice Smith"],"doc_id":"d1"})" "\n"
                                R"({"title":"Fresh","authors":["Carol"]})" "\n"
                                "\n"
                                R"({"title":"No Year Paper","authors":["Carol"]})" "\n"
                                R"({"title":"Unknown","authors":["Carol"]})" "\n");
  const auto summary = label_batch(store, dir / "q.jsonl", dir / "l.jsonl", 3, 2020);
  CHECK(summary.queries == 4);
  CHECK(summary.ok == 1);
  CHECK(summary.ineligible == 1);
  CHECK(summary.missing_year == 1);
  CHECK(summary.not_found == 1);

  std::istringstream lines(schubert::testing::read_text(dir / "l.jsonl"));
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(lines, line);) out.push_back(nlohmann::json::parse(line));
  REQUIRE(out.size() == 4);
  CHECK(out[0]["doc_id"] == "d1");
  CHECK(out[0]["article_id"] == "P");
  CHECK(out[0]["count"] == 4);
  CHECK(out[0]["status"] == "ok");
  CHECK(out[1]["status"] == "ineligible");
  CHECK(out[1]["score"].is_null());
  CHECK_FALSE(out[1].contains("doc_id"));
  CHECK(out[2]["status"] == "missing_year");
  CHECK(out[2]["article_id"] == "Q");
  CHECK(out[3]["status"] == "not_found");
  CHECK(out[3]["article_id"].is_null());

  schubert::testing::write_text(dir / "bad.jsonl", R"({"title":"x"})" "\n");
  CHECK_THROWS_AS(label_batch(store, dir / "bad.jsonl", dir / "l2.jsonl", 3, 2020), InvalidInput);
}

TEST_CASE("resolver agrees with a linear scan") {
  TempDir dir;
  const schubert::testing::CorpusSpec spec{.records = 1500, .author_pool = 300, .title_pool = 400};
  const auto records = schubert::testing::synthetic_corpus(21, spec);
  const auto store = corpus::build_store(records, dir / "s.db");
  for (const auto& q : schubert::testing::synthetic_queries(records, 100, 4, spec)) {
    const auto got = find_citations_for_article(store, q);
    const auto want = schubert::testing::linear_scan_find(records, q);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->first == want->first);
      CHECK(got->second == want->second);
      CHECK(got->second.dropped_missing == want->second.dropped_missing);
    }
  }
}
