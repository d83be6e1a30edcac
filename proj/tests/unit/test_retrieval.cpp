#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "factalign/error.hpp"
#include "factalign/io.hpp"
#include "factalign/retrieval.hpp"
#include "factalign/text.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

namespace fa = factalign;

namespace {

std::vector<fa::Document> fixture_corpus() {
  return fa::io::read_records<fa::Document>(fixtures::path("corpus.jsonl"),
                                            fa::io::document_from_json);
}

}  // namespace

TEST(ChunkWindows, ShortLongAndExact) {
  const fa::RetrievalParams p;  // 300 / 20
  using W = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(fa::chunk_windows(0, p), W{});
  EXPECT_EQ(fa::chunk_windows(5, p), (W{{0, 5}}));
  EXPECT_EQ(fa::chunk_windows(300, p), (W{{0, 300}}));
  EXPECT_EQ(fa::chunk_windows(301, p), (W{{0, 300}, {280, 301}}));
  EXPECT_EQ(fa::chunk_windows(700, p), (W{{0, 300}, {280, 580}, {560, 700}}));
}

TEST(ChunkWindows, CoverEveryTokenWithExactOverlap) {
  gen::Source g(21);
  for (int i = 0; i < 500; ++i) {
    fa::RetrievalParams p;
    p.chunk_size = g.index(1, 50);
    p.chunk_overlap = g.index(0, p.chunk_size - 1);
    const auto n = g.index(0, 400);
    const auto w = fa::chunk_windows(n, p);
    std::vector<int> cover(n, 0);
    for (std::size_t k = 0; k < w.size(); ++k) {
      ASSERT_LT(w[k].first, w[k].second);
      ASSERT_LE(w[k].second - w[k].first, p.chunk_size);
      for (auto t = w[k].first; t < w[k].second; ++t) ++cover[t];
      if (k > 0) {
        ASSERT_EQ(w[k].first, w[k - 1].first + p.chunk_size - p.chunk_overlap);
      }
    }
    for (int c : cover) ASSERT_GE(c, 1);
    if (n) {
      ASSERT_EQ(w.back().second, n);
      // no window is wholly contained in the previous one
      if (w.size() > 1) {
        ASSERT_GT(w.back().second, w[w.size() - 2].second);
      }
    }
  }
}

TEST(RetrievalParams, Validation) {
  for (auto p : {fa::RetrievalParams{0, 0, 1}, fa::RetrievalParams{10, 10, 1},
                 fa::RetrievalParams{10, 2, 0}}) {
    EXPECT_THROW(p.validate(), fa::Error);
  }
}

TEST(RetrievalIndex, EmptyCorpus) {
  try {
    fa::RetrievalIndex::build({{"d", "   "}});
    FAIL();
  } catch (const fa::Error& e) {
    EXPECT_EQ(e.code(), fa::ErrorCode::kEmptyCorpus);
  }
  EXPECT_THROW(fa::RetrievalIndex::build({}), fa::Error);
}

TEST(RetrievalIndex, FixtureChunksHonorWindowParameters) {
  auto idx = fa::RetrievalIndex::build(fixture_corpus());
  std::vector<const fa::Chunk*> long_chunks;
  for (const auto& c : idx.chunks()) {
    if (c.doc_id == "long") long_chunks.push_back(&c);
    const auto toks = fa::text::split_whitespace(c.text);
    EXPECT_EQ(toks.size(), c.token_end - c.token_begin);
    EXPECT_LE(toks.size(), 300u);
  }
  ASSERT_EQ(long_chunks.size(), 3u);
  EXPECT_EQ(long_chunks[1]->token_begin, 280u);
  EXPECT_EQ(long_chunks[1]->token_end, 580u);
  EXPECT_EQ(fa::text::split_whitespace(long_chunks[1]->text).front(), "w280");
  EXPECT_EQ(long_chunks[2]->token_begin, 560u);
  EXPECT_EQ(idx.chunks().size(), 6u);
}

TEST(RetrievalIndex, ScoresMatchHandComputedIdf) {
  // 3 chunks: "a b", "a c", "c c d". N=3; df(a)=2, df(c)=2, df(d)=1.
  fa::RetrievalParams p{3, 0, 10};
  auto idx = fa::RetrievalIndex::build({{"x", "a b"}, {"y", "a c"}, {"z", "c c d"}}, p);
  auto r = idx.retrieve("A c d d", 10);
  ASSERT_EQ(r.size(), 3u);
  const double idf2 = std::log(1.0 + 3.0 / 2.0), idf1 = std::log(1.0 + 3.0);
  EXPECT_EQ(r[0].chunk->doc_id, "z");
  EXPECT_NEAR(r[0].score, idf2 + idf1, 1e-12);  // c, d; repeats ignored
  EXPECT_EQ(r[1].chunk->doc_id, "y");
  EXPECT_NEAR(r[1].score, 2 * idf2, 1e-12);
  EXPECT_EQ(r[2].chunk->doc_id, "x");
  EXPECT_NEAR(r[2].score, idf2, 1e-12);
  EXPECT_TRUE(idx.retrieve("nothing here", 10).empty());
}

TEST(RetrievalIndex, TiesBreakByDocThenChunk) {
  fa::RetrievalParams p{2, 0, 10};
  auto idx = fa::RetrievalIndex::build({{"b", "t x t y"}, {"a", "t z"}}, p);
  auto r = idx.retrieve("t", 10);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].chunk->doc_id, "a");
  EXPECT_EQ(r[1].chunk->doc_id, "b");
  EXPECT_EQ(r[1].chunk->chunk_id, 0u);
  EXPECT_EQ(r[2].chunk->chunk_id, 1u);
}

TEST(RetrievalIndex, RandomCorporaObeyContract) {
  gen::Source g(22);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<fa::Document> docs;
    const auto nd = g.index(1, 6);
    for (std::size_t d = 0; d < nd; ++d) {
      std::string t;
      const auto nw = g.index(1, 80);
      for (std::size_t w = 0; w < nw; ++w) t += g.word(1) + " ";
      docs.push_back({"d" + std::to_string(d), t});
    }
    fa::RetrievalParams p{g.index(2, 20), 0, 10};
    p.chunk_overlap = g.index(0, p.chunk_size - 1);
    auto idx = fa::RetrievalIndex::build(docs, p);
    for (int q = 0; q < 10; ++q) {
      const std::string query = g.word(1) + " " + g.word(1) + " " + g.word(1);
      const auto k = g.index(1, 12);
      auto r = idx.retrieve(query, k);
      ASSERT_LE(r.size(), k);
      std::set<const fa::Chunk*> seen;
      for (std::size_t i = 0; i < r.size(); ++i) {
        ASSERT_TRUE(seen.insert(r[i].chunk).second);
        ASSERT_GT(r[i].score, 0.0);
        if (i) {
          const auto& a = r[i - 1];
          const auto& b = r[i];
          ASSERT_TRUE(a.score > b.score ||
                      (a.score == b.score &&
                       std::tie(a.chunk->doc_id, a.chunk->chunk_id) <
                           std::tie(b.chunk->doc_id, b.chunk->chunk_id)));
        }
      }
      // Prefix property: a smaller k returns a prefix of a larger one.
      auto more = idx.retrieve(query, k + 5);
      for (std::size_t i = 0; i < r.size(); ++i) ASSERT_EQ(r[i].chunk, more[i].chunk);
    }
  }
}

TEST(RetrievalIndex, EveryChunkRetrievableByItsOwnText) {
  auto idx = fa::RetrievalIndex::build(fixture_corpus());
  for (const auto& c : idx.chunks()) {
    auto r = idx.retrieve(c.text, idx.chunks().size());
    bool found = false;
    for (const auto& s : r) found |= (s.chunk == &c);
    EXPECT_TRUE(found) << c.doc_id << "#" << c.chunk_id;
    EXPECT_EQ(r.front().chunk, &c) << c.doc_id << "#" << c.chunk_id;
  }
}

TEST(RetrievalIndex, KMustBePositive) {
  auto idx = fa::RetrievalIndex::build({{"d", "a b"}});
  EXPECT_THROW(idx.retrieve("a", 0), fa::Error);
}

TEST(RetrievalIndex, JsonRoundTripPreservesResults) {
  auto idx = fa::RetrievalIndex::build(fixture_corpus());
  auto loaded = fa::RetrievalIndex::from_json(nlohmann::json::parse(idx.to_json().dump()));
  EXPECT_EQ(loaded.to_json().dump(), idx.to_json().dump());
  for (const char* q : {"Moon orbits", "Paris capital", "w300 w10", "light sound"}) {
    auto a = idx.retrieve(q);
    auto b = loaded.retrieve(q);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].chunk->doc_id, b[i].chunk->doc_id);
      EXPECT_EQ(a[i].chunk->chunk_id, b[i].chunk->chunk_id);
      EXPECT_EQ(a[i].score, b[i].score);
    }
  }
}
