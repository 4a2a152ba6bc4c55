#include <doctest.h>

#include <bit>
#include <cstring>

#include "schubert/chunking.hpp"
#include "schubert/error.hpp"
#include "support.hpp"

using namespace schubert;
using namespace schubert::chunking;

namespace {

TokenSequence numbered(std::size_t n) {
  TokenSequence seq;
  for (std::size_t i = 0; i < n; ++i) seq.tokens.push_back("t" + std::to_string(i));
  return seq;
}

std::vector<std::pair<std::size_t, std::size_t>> windows(const std::vector<Chunk>& chunks) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : chunks) out.emplace_back(c.start, c.end);
  return out;
}

}  // namespace

TEST_CASE("tokenize splits on Unicode whitespace and lowercases") {
  const auto seq = tokenize("  The Quick\tBROWN　fox\n\nÜber ", "d1");
  CHECK(seq.source_id == "d1");
  CHECK(seq.tokens == std::vector<std::string>{"the", "quick", "brown", "fox", "über"});
  CHECK(tokenize(" \n\t ").tokens.empty());
}

TEST_CASE("token_spans index the original text") {
  const std::string text = "ab  cé\nd";
  const auto spans = token_spans(text);
  REQUIRE(spans.size() == 3);
  CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "cé");
  CHECK(spans[2].end == text.size());
}

TEST_CASE("fixed chunk cases with default parameters") {
  using W = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(windows(chunk(numbered(1))) == W{{0, 1}});
  CHECK(windows(chunk(numbered(512))) == W{{0, 512}});
  CHECK(windows(chunk(numbered(513))) == W{{0, 512}, {462, 513}});
  CHECK(windows(chunk(numbered(974))) == W{{0, 512}, {462, 974}});
  CHECK(windows(chunk(numbered(1000))) == W{{0, 512}, {462, 974}, {924, 1000}});
}

TEST_CASE("chunk rejects empty input and overlap >= size") {
  CHECK_THROWS_AS(chunk(numbered(0)), InvalidInput);
  CHECK_THROWS_AS(chunk(numbered(10), 5, 5), InvalidInput);
  CHECK_THROWS_AS(chunk(numbered(10), 0, 0), InvalidInput);
  CHECK_NOTHROW(chunk(numbered(10), 5, 4));
}

TEST_CASE("chunk properties against the emission loop") {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const std::size_t size = 1 + rng.below(64);
    const std::size_t overlap = rng.below(size);
    const std::size_t n = 1 + rng.below(400);
    const auto seq = numbered(n);
    const auto chunks = chunk(seq, size, overlap);
    CHECK(windows(chunks) == schubert::testing::brute_force_windows(n, size, overlap));
    CHECK(chunk_count(n, size, overlap) == chunks.size());
    // Every token covered; consecutive windows overlap by exactly `overlap`
    // except possibly the last; sizes never exceed chunk_size.
    CHECK(chunks.front().start == 0);
    CHECK(chunks.back().end == n);
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      CHECK(chunks[k].size() <= size);
      CHECK(chunks[k].tokens.front() == seq.tokens[chunks[k].start]);
      if (k + 1 < chunks.size()) {
        CHECK(chunks[k].size() == size);
        CHECK(chunks[k + 1].start == chunks[k].start + size - overlap);
      }
    }
  }
}

TEST_CASE("pseudo_embed golden values") {
  TokenSequence seq{"", {"hello", "world"}};
  const auto hw = pseudo_embed(chunk(seq).front(), 4);
  const std::uint32_t expected_bits[] = {0xbf37b8c2, 0x3f5bf8ef, 0xbf122a54, 0xbee72917};
  REQUIRE(hw.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::bit_cast<std::uint32_t>(hw[i]) == expected_bits[i]);
  CHECK(hw[0] == doctest::Approx(-0.7176629304885864).epsilon(1e-12));

  TokenSequence one{"", {"a"}};
  const auto a = pseudo_embed(chunk(one).front(), 3);
  CHECK(a[0] == 0x1.03f268p-1f);
  CHECK(a[1] == -0x1.753886p-2f);
  CHECK(a[2] == -0x1.d27e62p-1f);
}

TEST_CASE("pseudo_embed depends only on the chunk's tokens") {
  const auto x = tokenize("alpha beta gamma delta");
  const auto y = tokenize("ALPHA   beta\ngamma delta");
  CHECK(pseudo_embed(chunk(x).front(), 16) == pseudo_embed(chunk(y).front(), 16));
  const auto z = tokenize("alpha beta gamma deltb");
  CHECK(pseudo_embed(chunk(x).front(), 16) != pseudo_embed(chunk(z).front(), 16));
  // Shorter dims are prefixes.
  const auto long_v = pseudo_embed(chunk(x).front(), 32);
  const auto short_v = pseudo_embed(chunk(x).front(), 8);
  CHECK(std::equal(short_v.begin(), short_v.end(), long_v.begin()));
  for (const float v : long_v) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("embed_document_pseudo shape") {
  Rng rng(2);
  const auto text = schubert::testing::random_text(rng, 130);
  const auto doc = embed_document_pseudo("d", text, 64, 8, 12);
  CHECK(doc.dim == 12);
  CHECK(doc.n_chunks() == chunk_count(130, 64, 8));
  CHECK(doc.n_chunks() == 3);
  CHECK_FALSE(doc.label.has_value());
  CHECK_THROWS_AS(embed_document_pseudo("e", "   ", 64, 8, 12), InvalidInput);
}

TEST_CASE("mean_pool") {
  const auto m = mean_pool({{1.0, 2.0}, {3.0, -2.0}, {2.0, 3.0}});
  CHECK(m == std::vector<double>{2.0, 1.0});
  CHECK_THROWS_AS(mean_pool({}), InvalidInput);
  CHECK_THROWS_AS(mean_pool({{1.0}, {1.0, 2.0}}), InvalidInput);
}

TEST_CASE("count_code_points") {
  CHECK(count_code_points("") == 0);
  CHECK(count_code_points("abc") == 3);
  CHECK(count_code_points("Über σ 日本") == 9);
  CHECK(count_code_points("😀") == 1);
}
