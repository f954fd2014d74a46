#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spatialrel/concordance.hpp"
#include "support/oracles.hpp"

using namespace spatialrel;

TEST(KwicSearch, SingleHitWindowOne) {
  const Corpus corpus({{"doc", std::nullopt, "a b near c d"}});
  const auto hits = kwic_search(corpus, "near", 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].left, std::vector<std::string>{"b"});
  EXPECT_EQ(hits[0].right, std::vector<std::string>{"c"});
  EXPECT_EQ(hits[0].term, "near");
  EXPECT_EQ(hits[0].match_index, 2u);
  EXPECT_EQ(hits[0].rendered, "b near c");
}

TEST(KwicSearch, TruncatesAtDocumentBoundaries) {
  const Corpus corpus({{"doc", std::nullopt, "Near the lake, near."}});
  const auto hits = kwic_search(corpus, "NEAR", 15);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_TRUE(hits[0].left.empty());
  EXPECT_EQ(hits[0].term, "Near");
  EXPECT_EQ(hits[0].right.size(), 3u);
  EXPECT_EQ(hits[1].left.size(), 3u);
  EXPECT_TRUE(hits[1].right.empty());
}

TEST(KwicSearch, MultiTokenTermRejected) {
  const Corpus corpus({{"doc", std::nullopt, "next to the road"}});
  try {
    kwic_search(corpus, "next to", 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("term must be a single token"), std::string::npos);
  }
  EXPECT_THROW(kwic_search(corpus, "road", 0), Error);
}

TEST(KwicSearch, OrderedByDocThenIndex) {
  const Corpus corpus({{"b", std::nullopt, "near x near"}, {"a", std::nullopt, "y near"}});
  const auto hits = kwic_search(corpus, "near", 2);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].doc_id, "a");
  EXPECT_EQ(hits[1].doc_id, "b");
  EXPECT_EQ(hits[1].match_index, 0u);
  EXPECT_EQ(hits[2].match_index, 2u);
}

TEST(KwicSearch, MatchesNaiveOracleOnRandomCorpora) {
  const std::vector<std::string> vocab{"near", "Near", "NEAR", "nearer", "the", "Keswick", "o'er",
                                       "church-yard", "lake", "a", "road", "1799"};
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<oracle::SyntheticDoc> synth;
    std::vector<Document> docs;
    for (int d = 0; d < 50; ++d) {
      synth.push_back(oracle::make_synthetic_doc(rng, "doc" + std::to_string(d), 40, vocab));
      docs.push_back({synth.back().id, std::nullopt, synth.back().body});
    }
    const Corpus corpus(docs);
    const std::size_t window = 1 + static_cast<std::size_t>(trial % 5);
    const auto hits = kwic_search(corpus, "near", window);
    const auto expected = oracle::naive_kwic(synth, "near", window);
    ASSERT_EQ(hits.size(), expected.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      EXPECT_EQ(hits[i].doc_id, expected[i].doc_id);
      EXPECT_EQ(hits[i].match_index, expected[i].match_index);
      EXPECT_EQ(hits[i].left, expected[i].left);
      EXPECT_EQ(hits[i].term, expected[i].term);
      EXPECT_EQ(hits[i].right, expected[i].right);
    }
  }
}

TEST(Filter, TokenBoundaryMatching) {
  const Corpus corpus({{"d", std::nullopt,
                        "The Keswickian style is seen near the church. Further on, near Keswick, the road "
                        "bends. Much later, far from town, near Greta Hall."}});
  const auto hits = kwic_search(corpus, "near", 3);
  ASSERT_EQ(hits.size(), 3u);
  const auto kes = filter_by_cooccurrence(hits, "Keswick");
  ASSERT_EQ(kes.size(), 1u);
  EXPECT_EQ(kes[0].rendered, "church Further on near Keswick the road");
  EXPECT_EQ(filter_by_cooccurrence(hits, "greta hall").size(), 1u);
  EXPECT_TRUE(filter_by_cooccurrence(hits, "Ambleside").empty());
  EXPECT_THROW(filter_by_cooccurrence(hits, "  "), Error);
}

TEST(Filter, SubsetAndIdempotent) {
  const std::vector<std::string> vocab{"near", "Keswick", "keswick", "Keswickian", "lake", "the"};
  std::mt19937_64 rng(5);
  std::vector<Document> docs;
  for (int d = 0; d < 100; ++d) {
    const auto s = oracle::make_synthetic_doc(rng, "d" + std::to_string(d), 30, vocab);
    docs.push_back({s.id, std::nullopt, s.body});
  }
  const auto hits = kwic_search(Corpus(docs), "near", 4);
  const auto once = filter_by_cooccurrence(hits, "Keswick");
  EXPECT_LE(once.size(), hits.size());
  EXPECT_EQ(filter_by_cooccurrence(once, "Keswick"), once);
  for (const auto& h : once) {
    EXPECT_TRUE(contains_phrase(h.rendered, {"keswick"}));
  }
}

TEST(KwicOutput, JsonLinesShape) {
  const Corpus corpus({{"doc", std::nullopt, "a b near c d"}});
  const auto hits = kwic_search(corpus, "near", 1);
  EXPECT_EQ(hits_to_jsonl(hits),
            "{\"doc_id\":\"doc\",\"match_index\":2,\"left\":[\"b\"],\"term\":\"near\",\"right\":[\"c\"]}\n");
  EXPECT_EQ(hit_from_json(nlohmann::json::parse(to_json(hits[0]).dump())), hits[0]);
}

TEST(KwicOutput, ThreeColumnTable) {
  const Corpus corpus({{"doc", std::nullopt, "from Castlehead near Keswick town. x near y"}});
  const auto table = hits_to_table(kwic_search(corpus, "near", 2));
  EXPECT_EQ(table,
            "           Left  Term  Right\n"
            "from Castlehead  near  Keswick town\n"
            "         town x  near  y\n");
}
