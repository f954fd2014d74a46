#ifndef SPATIALREL_EVALUATION_HPP
#define SPATIALREL_EVALUATION_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "triples.hpp"

namespace spatialrel {

/// Exact non-negative fraction, always kept in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorKind::evaluation, "zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const auto g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  /// Parses a plain decimal such as "0.630".
  static Rational from_decimal(std::string_view text) {
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool seen_point = false;
    bool any_digit = false;
    for (const char c : text) {
      if (c == '.' && !seen_point) {
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        num = num * 10 + (c - '0');
        if (seen_point) den *= 10;
        any_digit = true;
      } else {
        throw Error(ErrorKind::input, "not a decimal: '" + std::string(text) + "'");
      }
    }
    if (!any_digit) throw Error(ErrorKind::input, "not a decimal: '" + std::string(text) + "'");
    return {num, den};
  }

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator+(const Rational& o) const {
    const auto l = std::lcm(den_, o.den_);
    return {num_ * (l / den_) + o.num_ * (l / o.den_), l};
  }

  Rational operator/(std::int64_t k) const { return {num_, den_ * k}; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  auto operator<=>(const Rational& o) const { return num_ * o.den_ <=> o.num_ * den_; }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Rounds half-up at `decimals` places using exact integer arithmetic, so
/// 0.6515 displays as 0.652.
inline std::string format_decimal(const Rational& r, int decimals = 3) {
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const std::int64_t scaled = (2 * r.numerator() * scale + r.denominator()) / (2 * r.denominator());
  std::string digits = std::to_string(scaled / scale);
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % scale);
    digits += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return digits;
}

struct GoldEntry {
  std::string context_id;
  bool relation_holds = false;
  std::set<std::pair<std::string, std::string>> expected_pairs;  // place_key()-normalized
};

struct GoldStandard {
  std::vector<GoldEntry> entries;

  const GoldEntry* find(std::string_view context_id) const {
    for (const auto& e : entries) {
      if (e.context_id == context_id) return &e;
    }
    return nullptr;
  }
};

namespace detail {

inline std::optional<bool> parse_bool(std::string_view s) {
  const auto f = case_fold(trim(s));
  if (f == "true" || f == "1" || f == "yes") return true;
  if (f == "false" || f == "0" || f == "no") return false;
  return std::nullopt;
}

}  // namespace detail

/// Gold CSV: `context_id,relation_holds,subject,object`, one row per
/// expected pair. A context whose relation does not hold has a single row
/// with empty pair fields. The header row is optional.
inline GoldStandard parse_gold(std::string_view text, std::string_view source = "gold") {
  auto fail = [&](std::size_t line, const std::string& msg) {
    return Error(ErrorKind::input, std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };
  std::size_t bad_line = 0;
  const auto rows = csv::parse(text, &bad_line);
  if (!rows) throw fail(bad_line, "unterminated quoted field");

  GoldStandard gold;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < rows->size(); ++r) {
    const auto& row = (*rows)[r];
    if (r == 0 && !row.fields.empty() && trim(row.fields[0]) == "context_id") continue;
    if (row.fields.size() != 4) throw fail(row.line, "expected 4 columns");
    const std::string id(trim(row.fields[0]));
    if (id.empty()) throw fail(row.line, "empty context_id");
    const auto holds = detail::parse_bool(row.fields[1]);
    if (!holds) throw fail(row.line, "relation_holds must be true or false");
    const auto subject = place_key(row.fields[2]);
    const auto object = place_key(row.fields[3]);

    if (*holds && (subject.empty() || object.empty())) {
      throw fail(row.line, "relation_holds=true requires subject and object");
    }
    if (!*holds && (!subject.empty() || !object.empty())) {
      throw fail(row.line, "relation_holds=false must leave subject and object empty");
    }

    const auto it = index.find(id);
    if (it == index.end()) {
      index.emplace(id, gold.entries.size());
      GoldEntry e{id, *holds, {}};
      if (*holds) e.expected_pairs.emplace(subject, object);
      gold.entries.push_back(std::move(e));
      continue;
    }
    // Further rows for a context may only add distinct pairs.
    auto& entry = gold.entries[it->second];
    if (!entry.relation_holds || !*holds) {
      throw fail(row.line, "duplicate context_id '" + id + "'");
    }
    if (!entry.expected_pairs.emplace(subject, object).second) {
      throw fail(row.line, "duplicate pair for context_id '" + id + "'");
    }
  }
  return gold;
}

inline GoldStandard load_gold(const std::filesystem::path& path) {
  return parse_gold(read_file(path), path.string());
}

enum class DenominatorPolicy { all_parsed, valid_only };

inline std::string_view to_string(DenominatorPolicy p) {
  return p == DenominatorPolicy::all_parsed ? "all_parsed" : "valid_only";
}

struct PrecisionResult {
  std::size_t produced = 0;  // denominator
  std::size_t correct = 0;   // numerator

  /// Undefined ("no predictions") when nothing was produced.
  std::optional<Rational> precision() const {
    if (produced == 0) return std::nullopt;
    return Rational(static_cast<std::int64_t>(correct), static_cast<std::int64_t>(produced));
  }
};

/// Context id of a triple: its global passage number.
inline std::optional<std::string> context_of(const SemanticTriple& t) {
  if (!t.passage_number) return std::nullopt;
  return std::to_string(*t.passage_number);
}

/// A triple is correct when its normalized (subject, object) pair is listed
/// for its source context. Triples without a passage number can never be
/// correct but still count as produced.
inline bool is_correct(const SemanticTriple& t, const GoldStandard& gold) {
  const auto ctx = context_of(t);
  if (!ctx) return false;
  const auto* entry = gold.find(*ctx);
  if (!entry) {
    throw Error(ErrorKind::evaluation, "triple references unknown context_id '" + *ctx + "'");
  }
  return entry->expected_pairs.count({place_key(t.subject), place_key(t.object)}) > 0;
}

inline PrecisionResult score(const std::vector<SemanticTriple>& triples, const GoldStandard& gold,
                             DenominatorPolicy policy = DenominatorPolicy::all_parsed) {
  PrecisionResult r;
  for (const auto& t : triples) {
    const bool correct = is_correct(t, gold);
    if (policy == DenominatorPolicy::valid_only && t.validity != Validity::valid) continue;
    ++r.produced;
    if (correct) ++r.correct;
  }
  return r;
}

inline std::optional<Rational> precision(const std::vector<SemanticTriple>& triples,
                                         const GoldStandard& gold,
                                         DenominatorPolicy policy = DenominatorPolicy::all_parsed) {
  return score(triples, gold, policy).precision();
}

inline Rational average_precision(const std::vector<Rational>& iteration_precisions) {
  if (iteration_precisions.empty()) {
    throw Error(ErrorKind::evaluation, "average_precision needs at least one iteration");
  }
  Rational sum;
  for (const auto& p : iteration_precisions) sum = sum + p;
  return sum / static_cast<std::int64_t>(iteration_precisions.size());
}

struct EvaluationReport {
  std::string place;
  std::optional<std::size_t> frequency;
  std::optional<std::size_t> context_count;
  DenominatorPolicy denominator_policy = DenominatorPolicy::all_parsed;
  std::vector<PrecisionResult> iterations;
  std::optional<Rational> average;  // over iterations with a defined precision

  std::vector<Rational> iteration_precisions() const {
    std::vector<Rational> out;
    for (const auto& it : iterations) {
      if (auto p = it.precision()) out.push_back(*p);
    }
    return out;
  }
};

/// Scores every iteration. Iterations with no predictions are reported as
/// such and left out of the average.
inline EvaluationReport evaluate(const std::vector<std::vector<SemanticTriple>>& iterations,
                                 const GoldStandard& gold,
                                 DenominatorPolicy policy = DenominatorPolicy::all_parsed) {
  EvaluationReport report;
  report.denominator_policy = policy;
  for (const auto& triples : iterations) report.iterations.push_back(score(triples, gold, policy));
  const auto defined = report.iteration_precisions();
  if (!defined.empty()) report.average = average_precision(defined);
  return report;
}

inline nlohmann::ordered_json to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["place"] = report.place;
  j["frequency"] = report.frequency ? nlohmann::ordered_json(*report.frequency) : nullptr;
  j["context_count"] = report.context_count ? nlohmann::ordered_json(*report.context_count) : nullptr;
  j["denominator_policy"] = std::string(to_string(report.denominator_policy));
  auto its = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    const auto& it = report.iterations[i];
    nlohmann::ordered_json e;
    e["iteration"] = i + 1;
    e["produced"] = it.produced;
    e["correct"] = it.correct;
    if (const auto p = it.precision()) {
      e["precision"] = p->str();
      e["precision_value"] = p->value();
      e["precision_display"] = format_decimal(*p);
    } else {
      e["precision"] = "no predictions";
      e["precision_value"] = nullptr;
      e["precision_display"] = "n/a";
    }
    its.push_back(std::move(e));
  }
  j["iterations"] = std::move(its);
  if (report.average) {
    j["average_precision"] = report.average->str();
    j["average_precision_value"] = report.average->value();
    j["average_precision_display"] = format_decimal(*report.average);
  } else {
    j["average_precision"] = "no predictions";
    j["average_precision_value"] = nullptr;
    j["average_precision_display"] = "n/a";
  }
  return j;
}

/// One-row table: place, frequency, context count, (p1, p2, ...) = average.
inline std::string report_to_table(const EvaluationReport& report) {
  auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "-"; };
  std::string precisions = "(";
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    if (i) precisions += ", ";
    const auto p = report.iterations[i].precision();
    precisions += p ? format_decimal(*p) : "n/a";
  }
  precisions += ") = ";
  precisions += report.average ? format_decimal(*report.average) : "n/a";

  std::string out = "Place\tFrequency\tContext Count\tPrecision (iterations) = Average\n";
  out += report.place + "\t" + opt(report.frequency) + "\t" + opt(report.context_count) + "\t" +
         precisions + "\n";
  return out;
}

}  // namespace spatialrel

#endif  // SPATIALREL_EVALUATION_HPP
