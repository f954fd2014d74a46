#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spatialrel/corpus.hpp"
#include "support/oracles.hpp"

using namespace spatialrel;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("spatialrel_corpus_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  void write(const std::string& name, const std::string& data) const {
    std::ofstream(path_ / name, std::ios::binary) << data;
  }

 private:
  fs::path path_;
};

Corpus one_doc(const std::string& body) { return Corpus({{"doc", std::nullopt, body}}); }

}  // namespace

TEST(LoadCorpus, IdsFromFilenames) {
  TempDir dir;
  dir.write("b.txt", "second text");
  dir.write("a.txt", "first text");
  dir.write("c.txt", "third text");
  dir.write("notes.md", "ignored");
  const auto corpus = load_corpus(dir.path());
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus.document(0).id, "a");
  EXPECT_EQ(corpus.document(1).id, "b");
  EXPECT_EQ(corpus.document(2).id, "c");
}

TEST(LoadCorpus, EmptyDirectoryIsAnError) {
  TempDir dir;
  try {
    load_corpus(dir.path());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no documents found"), std::string::npos);
  }
}

TEST(LoadCorpus, InvalidUtf8NamesFile) {
  TempDir dir;
  dir.write("bad.txt", std::string("caf\xE9 near"));
  try {
    load_corpus(dir.path());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, ManifestWithLatin1AndDuplicateIds) {
  TempDir dir;
  dir.write("one.dat", std::string("caf\xE9 near Keswick"));
  dir.write("two.dat", "plain text");
  dir.write("manifest.tsv", "# id\tfile\nx\tone.dat\tlatin-1\ny\ttwo.dat\n");
  const auto corpus = load_corpus(dir.path(), dir.path() / "manifest.tsv");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.document(0).body, "café near Keswick");

  dir.write("dup.tsv", "x\tone.dat\tlatin-1\nx\ttwo.dat\n");
  EXPECT_THROW(load_corpus(dir.path(), dir.path() / "dup.tsv"), Error);
}

TEST(LoadCorpus, MissingManifestFileNamed) {
  TempDir dir;
  dir.write("m.tsv", "x\tmissing.txt\n");
  try {
    load_corpus(dir.path(), dir.path() / "m.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, MarkupStrippedOnIngest) {
  const auto corpus = load_corpus(fs::path(SPATIALREL_FIXTURES) / "lakes");
  ASSERT_EQ(corpus.size(), 3u);
  const auto& body = corpus.document(1).body;
  EXPECT_EQ(body.find('<'), std::string::npos);
  EXPECT_NE(body.find("from Ambleside to Grasmere"), std::string::npos);
  EXPECT_NE(body.find("Bowness & the"), std::string::npos);
}

TEST(CorpusStats, HandCountedDocument) {
  const auto corpus = one_doc("near Keswick near");
  const Gazetteer gaz({"Keswick"}, {});
  const auto s = corpus_stats(corpus, gaz, {"near"});
  EXPECT_EQ(s.file_count, 1u);
  EXPECT_EQ(s.word_count, 3u);
  EXPECT_EQ(s.unique_word_forms, 2u);
  EXPECT_EQ(s.relation_term_occurrences.at("near"), 2u);
  EXPECT_EQ(s.named_place_occurrences, 1u);
}

TEST(CorpusStats, EmptyCorpusRejected) {
  EXPECT_THROW(corpus_stats(Corpus{}, Gazetteer{}, {"near"}), Error);
}

TEST(PlaceFrequencies, SortedDescending) {
  const auto f = place_frequencies(one_doc("A A B"), Gazetteer({"A", "B"}, {}));
  EXPECT_EQ(f, (std::vector<std::pair<std::string, std::size_t>>{{"A", 2}, {"B", 1}}));
}

TEST(PlaceFrequencies, TiesBrokenLexicographically) {
  const auto f = place_frequencies(one_doc("Zeta Alpha Mu"), Gazetteer({"Mu", "Zeta", "Alpha"}, {}));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].first, "Alpha");
  EXPECT_EQ(f[1].first, "Mu");
  EXPECT_EQ(f[2].first, "Zeta");
}

// Hand enumeration: "Greta Hall" is one match; the standalone "Hall" later
// in the sentence is a second, separate match of the unigram entry.
TEST(PlaceFrequencies, LongestMatchMultiword) {
  const auto corpus = one_doc("at Greta Hall, near the Hall of greta hall");
  const Gazetteer gaz({"Hall", "Greta Hall", "Greta"}, {});
  const auto f = place_frequencies(corpus, gaz);
  EXPECT_EQ(f, (std::vector<std::pair<std::string, std::size_t>>{{"Greta Hall", 2}, {"Hall", 1}}));
  EXPECT_EQ(corpus_stats(corpus, gaz, {}).named_place_occurrences, 3u);
}

TEST(PlaceFrequencies, EmptyGazetteerGivesEmptyTable) {
  EXPECT_TRUE(place_frequencies(one_doc("Keswick"), Gazetteer{}).empty());
}

TEST(Gazetteer, ListFileParsing) {
  const auto gaz = load_gazetteer({fs::path(SPATIALREL_FIXTURES) / "gazetteer" / "places.txt"},
                                  {fs::path(SPATIALREL_FIXTURES) / "gazetteer" / "nouns.txt"});
  EXPECT_TRUE(gaz.is_place("keswick"));
  EXPECT_TRUE(gaz.is_place("GRETA  hall"));
  EXPECT_FALSE(gaz.is_place("# Place names from an upstream entity recogniser"));
  EXPECT_TRUE(gaz.is_geographic_noun("Rivers"));
  EXPECT_EQ(gaz.places().labels().size(), 19u);
}

TEST(Gazetteer, EntryWithoutWordsRejected) {
  EXPECT_THROW(Gazetteer({"--"}, {}), Error);
}

// Against the O(n*m) brute-force oracle on 1,000 synthetic documents, and
// invariant across thread counts.
TEST(CorpusStats, MatchesBruteForceOracle) {
  const std::vector<std::string> vocab{"near", "Near", "the", "Greta", "Hall", "Keswick", "lake",
                                       "rivers", "Scale", "Hill", "road", "of", "a", "bridge"};
  const std::vector<std::string> places{"Keswick", "Greta Hall", "Hall", "Scale Hill", "Greta Hall Keswick"};
  const std::vector<std::string> nouns{"lake", "river", "rivers", "road", "bridge"};
  std::mt19937_64 rng(1234);
  std::vector<oracle::SyntheticDoc> synth;
  std::vector<Document> docs;
  for (int i = 0; i < 1000; ++i) {
    synth.push_back(oracle::make_synthetic_doc(rng, "d" + std::to_string(i), 60, vocab));
    docs.push_back({synth.back().id, std::nullopt, synth.back().body});
  }
  const Corpus corpus(docs, 4);
  const Gazetteer gaz(places, nouns);
  const auto stats = corpus_stats(corpus, gaz, {"near", "road"}, 1);

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(oracle::ascii_lower(w));
    return out;
  };
  std::vector<std::vector<std::string>> place_phrases;
  for (const auto& p : places) place_phrases.push_back(split(p));
  std::vector<std::vector<std::string>> noun_phrases;
  for (const auto& n : nouns) noun_phrases.push_back(split(n));

  std::size_t words = 0, near = 0, road = 0, place_total = 0, noun_total = 0;
  std::set<std::string> forms;
  std::map<std::string, std::size_t> place_counts;
  for (const auto& d : synth) {
    std::vector<std::string> lowered;
    for (const auto& w : d.words) lowered.push_back(oracle::ascii_lower(w));
    words += lowered.size();
    for (const auto& w : lowered) {
      forms.insert(w);
      near += w == "near";
      road += w == "road";
    }
    for (const auto& [label, n] : oracle::brute_force_phrase_counts(lowered, place_phrases, places)) {
      place_counts[label] += n;
      place_total += n;
    }
    for (const auto& [label, n] : oracle::brute_force_phrase_counts(lowered, noun_phrases, nouns)) noun_total += n;
  }
  EXPECT_EQ(stats.word_count, words);
  EXPECT_EQ(stats.unique_word_forms, forms.size());
  EXPECT_EQ(stats.relation_term_occurrences.at("near"), near);
  EXPECT_EQ(stats.relation_term_occurrences.at("road"), road);
  EXPECT_EQ(stats.named_place_occurrences, place_total);
  EXPECT_EQ(stats.geographic_noun_occurrences, noun_total);

  std::size_t per_doc = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) per_doc += corpus.tokens(d).size();
  EXPECT_EQ(per_doc, stats.word_count);

  std::size_t freq_sum = 0;
  for (const auto& [label, n] : place_frequencies(corpus, gaz)) {
    EXPECT_EQ(n, place_counts[label]) << label;
    freq_sum += n;
  }
  EXPECT_EQ(freq_sum, stats.named_place_occurrences);

  EXPECT_EQ(corpus_stats(corpus, gaz, {"near", "road"}, 8), stats);
  EXPECT_EQ(corpus_stats(Corpus(docs, 1), gaz, {"near", "road"}, 3), stats);
}

TEST(CorpusStats, LakesFixture) {
  const auto corpus = load_corpus(fs::path(SPATIALREL_FIXTURES) / "lakes");
  const auto gaz = load_gazetteer({fs::path(SPATIALREL_FIXTURES) / "gazetteer" / "places.txt"},
                                  {fs::path(SPATIALREL_FIXTURES) / "gazetteer" / "nouns.txt"});
  const auto s = corpus_stats(corpus, gaz, {"near"});
  EXPECT_EQ(s.file_count, 3u);
  EXPECT_EQ(s.relation_term_occurrences.at("near"), 7u);
  const auto f = place_frequencies(corpus, gaz);
  ASSERT_FALSE(f.empty());
  EXPECT_EQ(f.front(), (std::pair<std::string, std::size_t>{"Keswick", 4}));
}
