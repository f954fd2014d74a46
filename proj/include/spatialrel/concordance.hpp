#ifndef SPATIALREL_CONCORDANCE_HPP
#define SPATIALREL_CONCORDANCE_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "text.hpp"

namespace spatialrel {

/// One keyword-in-context match. Windows are counted in word tokens and are
/// shorter than requested only at document boundaries.
struct KwicHit {
  std::string doc_id;
  std::size_t match_index = 0;
  std::vector<std::string> left;
  std::string term;
  std::vector<std::string> right;
  std::string rendered;

  bool operator==(const KwicHit&) const = default;
};

inline std::string render_passage(const std::vector<std::string>& left, std::string_view term,
                                  const std::vector<std::string>& right) {
  std::string out = join(left, " ");
  if (!out.empty()) out += ' ';
  out += term;
  for (const auto& r : right) {
    out += ' ';
    out += r;
  }
  return out;
}

/// Folded text of a single-token query; throws when the term is not exactly
/// one token.
inline std::string single_token(std::string_view term) {
  const auto tokens = tokenize(term);
  if (tokens.size() != 1) {
    throw Error(ErrorKind::config, "term must be a single token: '" + std::string(term) + "'");
  }
  return tokens.front().folded;
}

inline std::vector<KwicHit> kwic_search(const Corpus& corpus, std::string_view term,
                                        std::size_t window) {
  if (window < 1) throw Error(ErrorKind::config, "window must be at least 1");
  const auto needle = single_token(term);

  std::vector<KwicHit> hits;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& tokens = corpus.tokens(d);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].folded != needle) continue;
      KwicHit hit;
      hit.doc_id = corpus.document(d).id;
      hit.match_index = i;
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(tokens.size(), i + 1 + window);
      for (std::size_t k = lo; k < i; ++k) hit.left.push_back(tokens[k].text);
      hit.term = tokens[i].text;
      for (std::size_t k = i + 1; k < hi; ++k) hit.right.push_back(tokens[k].text);
      hit.rendered = render_passage(hit.left, hit.term, hit.right);
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

/// True when `phrase` occurs in `text` as a whole-token (or multi-token)
/// case-insensitive match.
inline bool contains_phrase(std::string_view text, const std::vector<std::string>& phrase) {
  if (phrase.empty()) return false;
  const auto tokens = folded_tokens(text);
  if (tokens.size() < phrase.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

/// Keeps the hits whose rendered window mentions `entity`; order preserved.
inline std::vector<KwicHit> filter_by_cooccurrence(const std::vector<KwicHit>& hits,
                                                   std::string_view entity) {
  const auto phrase = folded_tokens(entity);
  if (phrase.empty()) throw Error(ErrorKind::config, "entity must not be empty");
  std::vector<KwicHit> out;
  for (const auto& h : hits) {
    if (contains_phrase(h.rendered, phrase)) out.push_back(h);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const KwicHit& hit) {
  nlohmann::ordered_json j;
  j["doc_id"] = hit.doc_id;
  j["match_index"] = hit.match_index;
  j["left"] = hit.left;
  j["term"] = hit.term;
  j["right"] = hit.right;
  return j;
}

inline std::string hits_to_jsonl(const std::vector<KwicHit>& hits) {
  std::string out;
  for (const auto& h : hits) {
    out += to_json(h).dump();
    out += '\n';
  }
  return out;
}

inline KwicHit hit_from_json(const nlohmann::json& j) {
  KwicHit hit;
  hit.doc_id = j.at("doc_id").get<std::string>();
  hit.match_index = j.at("match_index").get<std::size_t>();
  hit.left = j.at("left").get<std::vector<std::string>>();
  hit.term = j.at("term").get<std::string>();
  hit.right = j.at("right").get<std::vector<std::string>>();
  hit.rendered = render_passage(hit.left, hit.term, hit.right);
  return hit;
}

namespace detail {

inline std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); pos += utf8::decode(s, pos).length) ++n;
  return n;
}

}  // namespace detail

/// Three-column concordance: left context right-aligned, the term, then the
/// right context.
inline std::string hits_to_table(const std::vector<KwicHit>& hits) {
  std::size_t left_width = 4;
  std::size_t term_width = 4;
  for (const auto& h : hits) {
    left_width = std::max(left_width, detail::display_width(join(h.left, " ")));
    term_width = std::max(term_width, detail::display_width(h.term));
  }
  auto pad_left = [](const std::string& s, std::size_t w) {
    return std::string(w - std::min(w, detail::display_width(s)), ' ') + s;
  };
  auto pad_right = [](const std::string& s, std::size_t w) {
    return s + std::string(w - std::min(w, detail::display_width(s)), ' ');
  };
  std::string out = pad_left("Left", left_width) + "  " + pad_right("Term", term_width) +
                    "  Right\n";
  for (const auto& h : hits) {
    out += pad_left(join(h.left, " "), left_width) + "  " + pad_right(h.term, term_width) +
           "  " + join(h.right, " ") + "\n";
  }
  return out;
}

}  // namespace spatialrel

#endif  // SPATIALREL_CONCORDANCE_HPP
