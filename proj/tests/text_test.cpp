#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spatialrel/corpus.hpp"
#include "spatialrel/text.hpp"
#include "support/oracles.hpp"

using namespace spatialrel;

namespace {

std::vector<std::string> texts(const std::vector<TokenSpan>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

}  // namespace

TEST(Tokenize, WhitespaceSentence) {
  EXPECT_EQ(tokenize("near the head of the lake").size(), 6u);
}

TEST(Tokenize, HyphenJoinsAndPunctuationDrops) {
  EXPECT_EQ(texts(tokenize("church-yard near the road.")),
            (std::vector<std::string>{"church-yard", "near", "the", "road"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, ApostrophesOnlyInternal) {
  EXPECT_EQ(texts(tokenize("o'er the rivers' banks, 'twas")),
            (std::vector<std::string>{"o'er", "the", "rivers", "banks", "twas"}));
  EXPECT_EQ(texts(tokenize("Queen\xE2\x80\x99s Head")), (std::vector<std::string>{"Queen\xE2\x80\x99s", "Head"}));
}

TEST(Tokenize, DashesBetweenWordsSplit) {
  EXPECT_EQ(texts(tokenize("lake -- calm--grey - still-")),
            (std::vector<std::string>{"lake", "calm", "grey", "still"}));
}

TEST(Tokenize, OffsetsAndIndices) {
  const std::string body = "  Café near\tKeswick!";
  const auto tokens = tokenize(body);
  ASSERT_EQ(tokens.size(), 3u);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    EXPECT_EQ(tokens[i].index, i);
    EXPECT_LT(tokens[i].byte_start, tokens[i].byte_end);
    EXPECT_EQ(body.substr(tokens[i].byte_start, tokens[i].byte_end - tokens[i].byte_start), tokens[i].text);
  }
  EXPECT_EQ(tokens[0].folded, "café");
  EXPECT_EQ(tokens[2].folded, "keswick");
}

TEST(Tokenize, InvalidBytesSeparate) {
  EXPECT_EQ(texts(tokenize(std::string("ab\xFF" "cd"))), (std::vector<std::string>{"ab", "cd"}));
}

TEST(CaseFold, LatinAndGreek) {
  EXPECT_EQ(case_fold("KESWICK"), "keswick");
  EXPECT_EQ(case_fold("ÉCOLE Œuvre"), "école œuvre");
  EXPECT_EQ(case_fold("ΑΘΗΝΑ"), "αθηνα");
  EXPECT_TRUE(iequals("Greta Hall", "greta HALL"));
}

// Fifty hand-written sentences; the library tokenizer must agree with the
// character-class reference tokenizer on every one.
TEST(Tokenize, MatchesReferenceOnSentenceFixture) {
  std::ifstream in(std::string(SPATIALREL_FIXTURES) + "/tokenizer_sentences.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto ours = tokenize(line);
    const auto ref = oracle::reference_tokenize(line);
    ASSERT_EQ(ours.size(), ref.size()) << line;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(ours[i].text, ref[i].text) << line;
      EXPECT_EQ(ours[i].byte_start, ref[i].start) << line;
      EXPECT_EQ(ours[i].byte_end, ref[i].end) << line;
    }
  }
  EXPECT_EQ(n, 50u);
}

TEST(Tokenize, RoundTripPropertyOnRandomText) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcXYZ019 -'.,;\n\t\"()";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::string body;
    for (int i = 0; i < 80; ++i) body += alphabet[pick(rng)];
    const auto tokens = tokenize(body);
    const auto ref = oracle::reference_tokenize(body);
    ASSERT_EQ(tokens.size(), ref.size()) << body;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      EXPECT_EQ(body.substr(tokens[i].byte_start, tokens[i].byte_end - tokens[i].byte_start), tokens[i].text);
      EXPECT_EQ(tokens[i].text, ref[i].text);
      if (i > 0) {
        EXPECT_GE(tokens[i].byte_start, tokens[i - 1].byte_end);
      }
    }
  }
}

TEST(StripMarkup, TagsRemovedTextKept) {
  EXPECT_EQ(strip_markup("<p>At <enamex type=\"loc\">Keswick</enamex> &amp; near</p>"), "At Keswick & near");
  EXPECT_EQ(strip_markup("a < b and c > d"), "a < b and c > d");
  EXPECT_EQ(strip_markup("x<!-- note > here -->y"), "xy");
  EXPECT_EQ(strip_markup("caf&#233; &#x41;"), "café A");
}
