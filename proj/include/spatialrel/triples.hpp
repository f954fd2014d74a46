#ifndef SPATIALREL_TRIPLES_HPP
#define SPATIALREL_TRIPLES_HPP

#include <cctype>
#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "text.hpp"

namespace spatialrel {

enum class Validity { valid, wrong_relation, entity_missing, malformed };

inline std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::valid: return "valid";
    case Validity::wrong_relation: return "wrong_relation";
    case Validity::entity_missing: return "entity_missing";
    case Validity::malformed: return "malformed";
  }
  return "malformed";
}

inline std::optional<Validity> parse_validity(std::string_view s) {
  if (s == "valid") return Validity::valid;
  if (s == "wrong_relation") return Validity::wrong_relation;
  if (s == "entity_missing") return Validity::entity_missing;
  if (s == "malformed") return Validity::malformed;
  return std::nullopt;
}

struct SemanticTriple {
  std::string subject;
  std::string relation;
  std::string object;
  std::optional<std::size_t> passage_number;
  std::optional<std::size_t> batch_index;
  Validity validity = Validity::valid;

  bool operator==(const SemanticTriple&) const = default;
};

enum class SkipReason { wrong_field_count, unterminated };

struct SkippedFragment {
  std::string raw;
  SkipReason reason;
  std::string detail;
};

struct ParseReport {
  std::vector<SemanticTriple> triples;
  std::vector<SkippedFragment> skipped_fragments;
  std::size_t not_found_count = 0;
};

/// Trims, collapses internal whitespace and drops trailing ASCII punctuation.
/// Casing is preserved and no alias merging is attempted: "greta hall" and
/// "Greta Hall" stay distinct labels.
inline std::string normalize_place(std::string_view label) {
  std::string out = collapse_whitespace(label);
  while (!out.empty() &&
         (std::ispunct(static_cast<unsigned char>(out.back())) || is_space(out.back()))) {
    out.pop_back();
  }
  return out;
}

/// Case-insensitive comparison key for place labels.
inline std::string place_key(std::string_view label) {
  return case_fold(normalize_place(label));
}

namespace detail {

inline std::size_t count_not_found(std::string_view segment) {
  const auto tokens = folded_tokens(segment);
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "not" && tokens[i + 1] == "found") {
      ++n;
      ++i;
    }
  }
  return n;
}

}  // namespace detail

/// Parses model output of the form "(1) <s, r, o>(2) <s, r, o>...".
///
/// An angle-bracket group is '<' up to the next '>' with no '<' in between.
/// Each group becomes a triple (split on its first two commas, fields
/// trimmed) or a skipped fragment. A "(n)" label immediately before a group,
/// whitespace aside, sets its passage number. "not found" outside groups is
/// counted. Never throws.
inline ParseReport parse_triples(std::string_view content) {
  ParseReport report;
  std::optional<std::size_t> label;
  std::size_t segment_start = 0;
  std::size_t pos = 0;

  auto close_segment = [&](std::size_t end) {
    report.not_found_count +=
        detail::count_not_found(content.substr(segment_start, end - segment_start));
  };

  while (pos < content.size()) {
    const char c = content[pos];
    if (c == '<') {
      const auto end = content.find_first_of("<>", pos + 1);
      if (end == std::string_view::npos || content[end] == '<') {
        const auto stop = end == std::string_view::npos ? content.size() : end;
        report.skipped_fragments.push_back({std::string(content.substr(pos, stop - pos)),
                                            SkipReason::unterminated, "missing closing '>'"});
        label.reset();
        pos = stop;
        continue;
      }
      close_segment(pos);
      const auto body = content.substr(pos + 1, end - pos - 1);
      const auto c1 = body.find(',');
      const auto c2 = c1 == std::string_view::npos ? c1 : body.find(',', c1 + 1);
      if (c2 == std::string_view::npos) {
        const std::size_t fields = c1 == std::string_view::npos ? 1 : 2;
        report.skipped_fragments.push_back({std::string(content.substr(pos, end - pos + 1)),
                                            SkipReason::wrong_field_count,
                                            "expected 3 fields, found " + std::to_string(fields)});
      } else {
        SemanticTriple t;
        t.subject = std::string(trim(body.substr(0, c1)));
        t.relation = std::string(trim(body.substr(c1 + 1, c2 - c1 - 1)));
        t.object = std::string(trim(body.substr(c2 + 1)));
        t.passage_number = label;
        t.validity = (t.subject.empty() || t.relation.empty() || t.object.empty())
                         ? Validity::malformed
                         : Validity::valid;
        report.triples.push_back(std::move(t));
      }
      label.reset();
      pos = end + 1;
      segment_start = pos;
      continue;
    }
    if (c == '(') {
      std::size_t k = pos + 1;
      while (k < content.size() && std::isdigit(static_cast<unsigned char>(content[k]))) ++k;
      if (k > pos + 1 && k < content.size() && content[k] == ')') {
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(content.data() + pos + 1, content.data() + k, value);
        label = ec == std::errc() ? std::optional<std::size_t>(value) : std::nullopt;
        pos = k + 1;
        continue;
      }
    }
    if (!is_space(c)) label.reset();
    ++pos;
  }
  close_segment(content.size());
  return report;
}

/// Classifies a parsed triple against the target relation and entity. The
/// entity must appear on exactly one side; self-loops are rejected.
inline SemanticTriple validate_triple(SemanticTriple triple, std::string_view relation,
                                      std::string_view entity) {
  if (trim(triple.subject).empty() || trim(triple.relation).empty() || trim(triple.object).empty()) {
    triple.validity = Validity::malformed;
    return triple;
  }
  if (case_fold(collapse_whitespace(triple.relation)) != case_fold(collapse_whitespace(relation))) {
    triple.validity = Validity::wrong_relation;
    return triple;
  }
  const auto target = place_key(entity);
  const bool subject_is_entity = place_key(triple.subject) == target;
  const bool object_is_entity = place_key(triple.object) == target;
  triple.validity = (subject_is_entity != object_is_entity) ? Validity::valid
                                                            : Validity::entity_missing;
  return triple;
}

/// Renders triples in the "(n) <s, r, o>" response shape. Triples without a
/// passage number get no label.
inline std::string render_triples(const std::vector<SemanticTriple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    if (t.passage_number) out += "(" + std::to_string(*t.passage_number) + ") ";
    out += "<" + t.subject + ", " + t.relation + ", " + t.object + ">";
  }
  return out;
}

inline const std::vector<std::string>& triple_csv_header() {
  static const std::vector<std::string> header{"subject",     "relation",    "object",
                                               "passage_number", "batch_index", "validity"};
  return header;
}

inline std::string triples_to_csv(const std::vector<SemanticTriple>& triples) {
  std::string out = csv::format_row(triple_csv_header());
  auto opt = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  for (const auto& t : triples) {
    out += csv::format_row({t.subject, t.relation, t.object, opt(t.passage_number),
                            opt(t.batch_index), std::string(to_string(t.validity))});
  }
  return out;
}

inline std::vector<SemanticTriple> triples_from_csv(std::string_view text,
                                                    std::string_view source = "triples") {
  std::size_t bad_line = 0;
  const auto rows = csv::parse(text, &bad_line);
  if (!rows) {
    throw Error(ErrorKind::input, std::string(source) + ":" + std::to_string(bad_line) +
                                      ": unterminated quoted field");
  }
  auto number = [&](const std::string& s, std::size_t line) -> std::optional<std::size_t> {
    if (s.empty()) return std::nullopt;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::input, std::string(source) + ":" + std::to_string(line) +
                                        ": not a number: '" + s + "'");
    }
    return v;
  };
  std::vector<SemanticTriple> out;
  for (std::size_t r = 0; r < rows->size(); ++r) {
    const auto& row = (*rows)[r];
    if (r == 0 && row.fields == triple_csv_header()) continue;
    if (row.fields.size() != 6) {
      throw Error(ErrorKind::input, std::string(source) + ":" + std::to_string(row.line) +
                                        ": expected 6 columns");
    }
    SemanticTriple t{row.fields[0], row.fields[1], row.fields[2],
                     number(row.fields[3], row.line), number(row.fields[4], row.line)};
    const auto v = parse_validity(row.fields[5]);
    if (!v) {
      throw Error(ErrorKind::input, std::string(source) + ":" + std::to_string(row.line) +
                                        ": unknown validity '" + row.fields[5] + "'");
    }
    t.validity = *v;
    out.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const SemanticTriple& t) {
  nlohmann::ordered_json j;
  j["subject"] = t.subject;
  j["relation"] = t.relation;
  j["object"] = t.object;
  j["passage_number"] = t.passage_number ? nlohmann::ordered_json(*t.passage_number) : nullptr;
  j["batch_index"] = t.batch_index ? nlohmann::ordered_json(*t.batch_index) : nullptr;
  j["validity"] = std::string(to_string(t.validity));
  return j;
}

inline std::string triples_to_jsonl(const std::vector<SemanticTriple>& triples) {
  std::string out;
  for (const auto& t : triples) out += to_json(t).dump() + "\n";
  return out;
}

}  // namespace spatialrel

#endif  // SPATIALREL_TRIPLES_HPP
