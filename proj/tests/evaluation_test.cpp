#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spatialrel/evaluation.hpp"

using namespace spatialrel;
namespace fs = std::filesystem;

namespace {

const fs::path kKeswick = fs::path(SPATIALREL_FIXTURES) / "keswick84";

SemanticTriple at(std::size_t context, std::string s, std::string o,
                  Validity v = Validity::valid) {
  return {std::move(s), "near", std::move(o), context, 0, v};
}

std::vector<SemanticTriple> scripted_keswick_triples() {
  const auto script = nlohmann::json::parse(read_file(kKeswick / "script.json"));
  auto triples = parse_triples(script.at(0).get<std::string>()).triples;
  for (auto& t : triples) t = validate_triple(t, "near", "Keswick");
  return triples;
}

std::string error_of(const std::string& gold_text) {
  try {
    parse_gold(gold_text, "g.csv");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Rational, ArithmeticAndDisplay) {
  EXPECT_EQ(Rational(14, 20), Rational(7, 10));
  EXPECT_EQ(Rational(14, 20).str(), "7/10");
  EXPECT_EQ(format_decimal(Rational(7, 10)), "0.700");
  EXPECT_EQ(format_decimal(Rational(1, 1)), "1.000");
  EXPECT_EQ(format_decimal(Rational(0, 5)), "0.000");
  EXPECT_EQ(format_decimal(Rational::from_decimal("0.6515")), "0.652");
  EXPECT_EQ(format_decimal(Rational::from_decimal("0.6514999")), "0.651");
  EXPECT_EQ(format_decimal(Rational(2, 3), 2), "0.67");
  EXPECT_EQ(Rational::from_decimal("0.630"), Rational(63, 100));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_THROW(Rational::from_decimal("abc"), Error);
  EXPECT_THROW(Rational(1, 0), Error);
}

TEST(LoadGold, ThreeRowFixture) {
  const auto gold = parse_gold(
      "context_id,relation_holds,subject,object\n"
      "1,true,Castlehead,Keswick\n"
      "2,false,,\n"
      "3,true,Greta Hall,Keswick\n");
  ASSERT_EQ(gold.entries.size(), 3u);
  EXPECT_TRUE(gold.entries[0].relation_holds);
  EXPECT_FALSE(gold.entries[1].relation_holds);
  EXPECT_TRUE(gold.entries[1].expected_pairs.empty());
  EXPECT_EQ(gold.entries[2].expected_pairs.count({"greta hall", "keswick"}), 1u);
}

TEST(LoadGold, HeaderOptional) {
  EXPECT_EQ(parse_gold("1,true,A,B\n").entries.size(), 1u);
}

TEST(LoadGold, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("context_id,relation_holds,subject,object\n1,true,,\n").find("g.csv:2:"), std::string::npos);
  EXPECT_NE(error_of("1,true,A,B\n2,false,A,\n").find("g.csv:2:"), std::string::npos);
  EXPECT_NE(error_of("1,maybe,A,B\n").find("g.csv:1:"), std::string::npos);
  EXPECT_NE(error_of("1,true,A\n").find("4 columns"), std::string::npos);
  EXPECT_NE(error_of("1,false,,\n1,false,,\n").find("duplicate context_id"), std::string::npos);
  EXPECT_NE(error_of("1,true,A,B\n1,true,a,b.\n").find("duplicate pair"), std::string::npos);
  EXPECT_NE(error_of("1,true,\"A,B\n").find("unterminated"), std::string::npos);
}

TEST(LoadGold, Keswick84Tally) {
  const auto gold = load_gold(kKeswick / "gold.csv");
  ASSERT_EQ(gold.entries.size(), 84u);
  std::size_t holds = 0, pairs = 0;
  for (const auto& e : gold.entries) {
    holds += e.relation_holds;
    pairs += e.expected_pairs.size();
  }
  // 10 contexts where the relation does not hold; three with a second pair.
  EXPECT_EQ(holds, 74u);
  EXPECT_EQ(pairs, 77u);
  EXPECT_EQ(gold.find("41")->expected_pairs.size(), 2u);
  EXPECT_FALSE(gold.find("8")->relation_holds);
}

TEST(Precision, TwentyProducedFourteenCorrect) {
  std::string text;
  for (int i = 1; i <= 20; ++i) text += std::to_string(i) + ",true,Place" + std::to_string(i) + ",Keswick\n";
  const auto gold = parse_gold(text);
  std::vector<SemanticTriple> triples;
  for (std::size_t i = 1; i <= 20; ++i) {
    triples.push_back(at(i, i <= 14 ? "place" + std::to_string(i) + "." : "Elsewhere", "KESWICK"));
  }
  const auto r = score(triples, gold);
  EXPECT_EQ(r.produced, 20u);
  EXPECT_EQ(r.correct, 14u);
  EXPECT_EQ(*r.precision(), Rational(7, 10));
  EXPECT_EQ(format_decimal(*r.precision()), "0.700");
}

TEST(Precision, IdenticalToGoldIsOne) {
  const auto gold = load_gold(kKeswick / "gold.csv");
  std::vector<SemanticTriple> triples;
  for (const auto& e : gold.entries) {
    for (const auto& [s, o] : e.expected_pairs) triples.push_back(at(std::stoul(e.context_id), s, o));
  }
  EXPECT_EQ(*precision(triples, gold), Rational(1, 1));
}

TEST(Precision, Keswick84ScriptedResponse) {
  const auto gold = load_gold(kKeswick / "gold.csv");
  const auto triples = scripted_keswick_triples();
  ASSERT_EQ(triples.size(), 84u);
  const auto all = score(triples, gold, DenominatorPolicy::all_parsed);
  EXPECT_EQ(all.correct, 53u);
  EXPECT_EQ(all.produced, 84u);
  EXPECT_EQ(*all.precision(), Rational(53, 84));
  const auto valid = score(triples, gold, DenominatorPolicy::valid_only);
  EXPECT_EQ(valid.correct, 53u);
  EXPECT_EQ(valid.produced, 78u);
}

TEST(Precision, NoPredictionsIsUndefined) {
  const auto gold = parse_gold("1,true,A,B\n");
  EXPECT_FALSE(precision({}, gold).has_value());
  EXPECT_FALSE(precision({at(1, "A", "B", Validity::wrong_relation)}, gold, DenominatorPolicy::valid_only)
                   .has_value());
  const auto report = evaluate({{}, {at(1, "A", "B")}}, gold);
  EXPECT_FALSE(report.iterations[0].precision().has_value());
  EXPECT_EQ(*report.average, Rational(1, 1));
  EXPECT_EQ(to_json(report)["iterations"][0]["precision"], "no predictions");
  EXPECT_FALSE(evaluate({{}}, gold).average.has_value());
}

TEST(Precision, UnknownContextIsAnError) {
  const auto gold = parse_gold("1,true,A,B\n");
  try {
    precision({at(2, "A", "B")}, gold);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::evaluation);
  }
}

TEST(Precision, UnlabelledTriplesCountButNeverMatch) {
  const auto gold = parse_gold("1,true,A,B\n");
  SemanticTriple t = at(1, "A", "B");
  t.passage_number.reset();
  EXPECT_EQ(*precision({t, at(1, "A", "B")}, gold), Rational(1, 2));
}

TEST(Precision, DuplicatesCountIndependently) {
  const auto gold = parse_gold("1,true,A,B\n");
  EXPECT_EQ(*precision({at(1, "A", "B"), at(1, "A", "B"), at(1, "C", "B")}, gold), Rational(2, 3));
}

TEST(Precision, MonotoneUnderAddition) {
  std::string text;
  for (int i = 1; i <= 30; ++i) text += std::to_string(i) + ",true,P" + std::to_string(i) + ",Keswick\n";
  const auto gold = parse_gold(text);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> ctx(1, 30);
  std::bernoulli_distribution good(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SemanticTriple> triples;
    for (int i = 0; i < 10; ++i) {
      const auto c = ctx(rng);
      triples.push_back(at(c, good(rng) ? "P" + std::to_string(c) : "Nowhere", "Keswick"));
    }
    for (const auto policy : {DenominatorPolicy::all_parsed, DenominatorPolicy::valid_only}) {
      const auto base = *precision(triples, gold, policy);
      auto plus_correct = triples;
      plus_correct.push_back(at(5, "P5", "Keswick"));
      EXPECT_GE(*precision(plus_correct, gold, policy), base);
      auto plus_wrong = triples;
      plus_wrong.push_back(at(5, "Nowhere", "Keswick"));
      EXPECT_LE(*precision(plus_wrong, gold, policy), base);
      EXPECT_LE(base, Rational(1, 1));
      EXPECT_GE(base, Rational(0, 1));
    }
  }
}

TEST(AveragePrecision, Table4Rows) {
  auto avg = [](const char* a, const char* b) {
    return format_decimal(average_precision({Rational::from_decimal(a), Rational::from_decimal(b)}));
  };
  EXPECT_EQ(avg("0.630", "0.702"), "0.666");
  EXPECT_EQ(avg("0.656", "0.647"), "0.652");
  EXPECT_EQ(avg("0.543", "0.675"), "0.609");
  EXPECT_EQ(avg("0.714", "0.606"), "0.660");
  EXPECT_EQ(average_precision({Rational::from_decimal("0.656"), Rational::from_decimal("0.647")}),
            Rational::from_decimal("0.6515"));
}

TEST(AveragePrecision, SingletonAndEmpty) {
  EXPECT_EQ(average_precision({Rational(53, 84)}), Rational(53, 84));
  EXPECT_THROW(average_precision({}), Error);
}

TEST(EvaluationReport, JsonAndTable) {
  const auto gold = load_gold(kKeswick / "gold.csv");
  const auto triples = scripted_keswick_triples();
  auto report = evaluate({triples, triples}, gold);
  report.place = "Keswick";
  report.context_count = 84;
  const auto j = to_json(report);
  EXPECT_EQ(j["iterations"][0]["precision"], "53/84");
  EXPECT_EQ(j["average_precision"], "53/84");
  EXPECT_EQ(j["denominator_policy"], "all_parsed");
  EXPECT_EQ(report_to_table(report),
            "Place\tFrequency\tContext Count\tPrecision (iterations) = Average\n"
            "Keswick\t-\t84\t(0.631, 0.631) = 0.631\n");
}
