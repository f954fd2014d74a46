#ifndef SPATIALREL_CORPUS_HPP
#define SPATIALREL_CORPUS_HPP

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace spatialrel {

struct Document {
  std::string id;
  std::optional<std::string> title;
  std::string body;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read file: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read failed: " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write file: " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

namespace detail {

inline void append_entity(std::string& out, std::string_view name) {
  if (name == "amp") out += '&';
  else if (name == "lt") out += '<';
  else if (name == "gt") out += '>';
  else if (name == "quot") out += '"';
  else if (name == "apos") out += '\'';
  else if (name.size() > 1 && name[0] == '#') {
    char32_t cp = 0;
    const bool hex = name[1] == 'x' || name[1] == 'X';
    for (std::size_t i = hex ? 2 : 1; i < name.size(); ++i) {
      const char c = name[i];
      int digit = -1;
      if (c >= '0' && c <= '9') digit = c - '0';
      else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
      if (digit < 0 || cp > 0x10FFFF) return;
      cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(digit);
    }
    if (cp > 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
      utf8::append(out, cp);
    }
  }
}

}  // namespace detail

/// Removes XML/HTML tags, comments and processing instructions, and decodes
/// the predefined and numeric character references. Text between tags is
/// kept byte-for-byte; a bare '<' that does not open a tag is left alone.
inline std::string strip_markup(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const char c = in[i];
    if (c == '<' && i + 1 < in.size()) {
      if (in.substr(i, 4) == "<!--") {
        const auto close = in.find("-->", i + 4);
        if (close != std::string_view::npos) {
          i = close + 3;
          continue;
        }
      }
      const char n = in[i + 1];
      const bool opens_tag = (n >= 'a' && n <= 'z') || (n >= 'A' && n <= 'Z') ||
                             n == '/' || n == '!' || n == '?';
      const auto close = in.find('>', i + 1);
      if (opens_tag && close != std::string_view::npos) {
        i = close + 1;
        continue;
      }
    }
    if (c == '&') {
      const auto semi = in.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const auto name = in.substr(i + 1, semi - i - 1);
        const std::size_t before = out.size();
        detail::append_entity(out, name);
        if (out.size() != before) {
          i = semi + 1;
          continue;
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

/// Matches multiword phrases over a token stream: left to right, longest
/// phrase first, matches never overlap.
class PhraseMatcher {
 public:
  struct Match {
    std::size_t entry;  // index into labels()
    std::size_t start;  // token ordinal
    std::size_t length;
  };

  PhraseMatcher() = default;

  /// Entries are tokenized with the corpus tokenizer; case-insensitive
  /// duplicates collapse onto the first spelling seen.
  explicit PhraseMatcher(const std::vector<std::string>& entries) {
    for (const auto& raw : entries) {
      const auto label = collapse_whitespace(raw);
      auto tokens = folded_tokens(label);
      if (tokens.empty()) {
        throw Error(ErrorKind::input, "gazetteer entry has no word tokens: '" + raw + "'");
      }
      const auto key = join(tokens, " ");
      if (seen_.count(key)) continue;
      seen_.emplace(key, labels_.size());
      by_first_[tokens.front()].push_back(labels_.size());
      labels_.push_back(label);
      phrases_.push_back(std::move(tokens));
    }
    for (auto& [first, ids] : by_first_) {
      std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return phrases_[a].size() > phrases_[b].size();
      });
    }
  }

  const std::vector<std::string>& labels() const { return labels_; }
  bool empty() const { return labels_.empty(); }

  /// Entry index for a label (case-insensitive, token-normalized).
  std::optional<std::size_t> find(std::string_view label) const {
    const auto it = seen_.find(join(folded_tokens(label), " "));
    if (it == seen_.end()) return std::nullopt;
    return it->second;
  }

  template <typename Visitor>
  void scan(const std::vector<TokenSpan>& tokens, Visitor&& visit) const {
    std::size_t i = 0;
    while (i < tokens.size()) {
      const auto it = by_first_.find(tokens[i].folded);
      std::size_t advance = 1;
      if (it != by_first_.end()) {
        for (const std::size_t id : it->second) {
          const auto& phrase = phrases_[id];
          if (i + phrase.size() > tokens.size()) continue;
          bool ok = true;
          for (std::size_t k = 1; k < phrase.size() && ok; ++k) {
            ok = tokens[i + k].folded == phrase[k];
          }
          if (ok) {
            visit(Match{id, i, phrase.size()});
            advance = phrase.size();
            break;
          }
        }
      }
      i += advance;
    }
  }

  std::vector<Match> matches(const std::vector<TokenSpan>& tokens) const {
    std::vector<Match> out;
    scan(tokens, [&](const Match& m) { out.push_back(m); });
    return out;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::string>> phrases_;
  std::unordered_map<std::string, std::size_t> seen_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
};

/// Place names (from an upstream entity recogniser) and geographic feature
/// nouns. Lookup is case-insensitive.
class Gazetteer {
 public:
  Gazetteer() = default;
  Gazetteer(const std::vector<std::string>& place_names,
            const std::vector<std::string>& geographic_nouns)
      : places_(place_names), nouns_(geographic_nouns) {}

  const PhraseMatcher& places() const { return places_; }
  const PhraseMatcher& nouns() const { return nouns_; }

  bool is_place(std::string_view name) const { return places_.find(name).has_value(); }
  bool is_geographic_noun(std::string_view noun) const { return nouns_.find(noun).has_value(); }

 private:
  PhraseMatcher places_;
  PhraseMatcher nouns_;
};

/// One entry per line; '#' starts a comment line; blank lines are skipped.
inline std::vector<std::string> read_list_file(const std::filesystem::path& path) {
  const auto data = read_file(path);
  if (utf8::find_invalid(data) != std::string_view::npos) {
    throw Error(ErrorKind::input, "list file is not valid UTF-8: " + path.string());
  }
  std::vector<std::string> entries;
  std::istringstream in(data);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    entries.emplace_back(t);
  }
  return entries;
}

inline Gazetteer load_gazetteer(const std::vector<std::filesystem::path>& place_files,
                                const std::vector<std::filesystem::path>& noun_files) {
  std::vector<std::string> places;
  std::vector<std::string> nouns;
  for (const auto& p : place_files) {
    auto e = read_list_file(p);
    places.insert(places.end(), e.begin(), e.end());
  }
  for (const auto& p : noun_files) {
    auto e = read_list_file(p);
    nouns.insert(nouns.end(), e.begin(), e.end());
  }
  return Gazetteer(places, nouns);
}

/// Immutable set of tokenized documents, ordered by id.
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<Document> docs, std::size_t threads = 1)
      : docs_(std::move(docs)) {
    std::sort(docs_.begin(), docs_.end(),
              [](const Document& a, const Document& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (docs_[i].id.empty()) throw Error(ErrorKind::input, "document with empty id");
      if (docs_[i].body.empty()) {
        throw Error(ErrorKind::input, "document '" + docs_[i].id + "' is empty");
      }
      if (i > 0 && docs_[i].id == docs_[i - 1].id) {
        throw Error(ErrorKind::input, "duplicate document id: " + docs_[i].id);
      }
    }
    tokens_.resize(docs_.size());
    detail::parallel_for(docs_.size(), threads,
                         [&](std::size_t i) { tokens_[i] = tokenize(docs_[i].body); });
  }

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const std::vector<Document>& documents() const { return docs_; }
  const Document& document(std::size_t i) const { return docs_.at(i); }
  const std::vector<TokenSpan>& tokens(std::size_t i) const { return tokens_.at(i); }

 private:
  std::vector<Document> docs_;
  std::vector<std::vector<TokenSpan>> tokens_;
};

/// Reads every `.txt` file under `root` (non-recursive), or the files listed
/// in `manifest` (`id<TAB>filename[<TAB>encoding]`, encoding utf-8 or
/// latin-1). Markup is stripped from every body.
inline Corpus load_corpus(const std::filesystem::path& root,
                          const std::optional<std::filesystem::path>& manifest = std::nullopt,
                          std::size_t threads = 1) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::config, "corpus root is not a directory: " + root.string());
  }

  struct Source {
    std::string id;
    fs::path file;
    bool latin1 = false;
  };
  std::vector<Source> sources;

  if (manifest) {
    const auto text = read_file(*manifest);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty() || trim(line).front() == '#') continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, '\t')) cols.emplace_back(trim(col));
      if (cols.size() < 2 || cols.size() > 3 || cols[0].empty() || cols[1].empty()) {
        throw Error(ErrorKind::input, manifest->string() + ":" + std::to_string(line_no) +
                                          ": expected id<TAB>filename[<TAB>encoding]");
      }
      Source s{cols[0], root / cols[1], false};
      if (cols.size() == 3) {
        const auto enc = case_fold(cols[2]);
        if (enc == "latin-1" || enc == "latin1" || enc == "iso-8859-1") {
          s.latin1 = true;
        } else if (enc != "utf-8" && enc != "utf8") {
          throw Error(ErrorKind::input, manifest->string() + ":" + std::to_string(line_no) +
                                            ": unsupported encoding '" + cols[2] + "'");
        }
      }
      sources.push_back(std::move(s));
    }
  } else {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      sources.push_back({entry.path().stem().string(), entry.path(), false});
    }
  }
  if (sources.empty()) {
    throw Error(ErrorKind::input, "no documents found in " + root.string());
  }
  std::sort(sources.begin(), sources.end(),
            [](const Source& a, const Source& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sources.size(); ++i) {
    if (sources[i].id == sources[i - 1].id) {
      throw Error(ErrorKind::input, "duplicate document id: " + sources[i].id);
    }
  }

  std::vector<Document> docs(sources.size());
  detail::parallel_for(sources.size(), threads, [&](std::size_t i) {
    const auto& src = sources[i];
    std::string raw = read_file(src.file);
    if (src.latin1) {
      raw = utf8::from_latin1(raw);
    } else if (const auto bad = utf8::find_invalid(raw); bad != std::string_view::npos) {
      throw Error(ErrorKind::input, "invalid UTF-8 at byte " + std::to_string(bad) +
                                        " in " + src.file.string());
    }
    docs[i].id = src.id;
    docs[i].body = strip_markup(raw);
    if (docs[i].body.empty()) {
      throw Error(ErrorKind::input, "empty document: " + src.file.string());
    }
  });
  return Corpus(std::move(docs), threads);
}

struct CorpusStats {
  std::size_t file_count = 0;
  std::size_t word_count = 0;
  std::size_t unique_word_forms = 0;
  std::size_t named_place_occurrences = 0;
  std::size_t geographic_noun_occurrences = 0;
  std::map<std::string, std::size_t> relation_term_occurrences;

  bool operator==(const CorpusStats&) const = default;
};

/// Word, vocabulary and gazetteer counts over the whole corpus. Relation
/// terms are counted by exact case-folded token equality.
inline CorpusStats corpus_stats(const Corpus& corpus, const Gazetteer& gazetteer,
                                const std::vector<std::string>& relation_terms,
                                std::size_t threads = 1) {
  if (corpus.empty()) throw Error(ErrorKind::input, "corpus is empty");

  std::vector<std::string> folded_terms;
  for (const auto& t : relation_terms) folded_terms.push_back(case_fold(trim(t)));

  struct Partial {
    std::size_t words = 0;
    std::size_t places = 0;
    std::size_t nouns = 0;
    std::vector<std::size_t> terms;
    std::unordered_set<std::string> forms;
  };
  std::vector<Partial> parts(corpus.size());

  detail::parallel_for(corpus.size(), threads, [&](std::size_t d) {
    const auto& tokens = corpus.tokens(d);
    Partial& p = parts[d];
    p.words = tokens.size();
    p.terms.assign(folded_terms.size(), 0);
    for (const auto& tok : tokens) {
      p.forms.insert(tok.folded);
      for (std::size_t k = 0; k < folded_terms.size(); ++k) {
        if (tok.folded == folded_terms[k]) ++p.terms[k];
      }
    }
    gazetteer.places().scan(tokens, [&](const PhraseMatcher::Match&) { ++p.places; });
    gazetteer.nouns().scan(tokens, [&](const PhraseMatcher::Match&) { ++p.nouns; });
  });

  CorpusStats stats;
  stats.file_count = corpus.size();
  std::unordered_set<std::string> forms;
  for (const auto& term : relation_terms) stats.relation_term_occurrences[term] = 0;
  for (auto& p : parts) {
    stats.word_count += p.words;
    stats.named_place_occurrences += p.places;
    stats.geographic_noun_occurrences += p.nouns;
    for (std::size_t k = 0; k < relation_terms.size(); ++k) {
      stats.relation_term_occurrences[relation_terms[k]] += p.terms[k];
    }
    forms.merge(p.forms);
  }
  stats.unique_word_forms = forms.size();
  return stats;
}

/// (place, count) pairs, highest count first, ties by place label. Places
/// that never occur are omitted.
inline std::vector<std::pair<std::string, std::size_t>> place_frequencies(
    const Corpus& corpus, const Gazetteer& gazetteer) {
  const auto& matcher = gazetteer.places();
  std::vector<std::size_t> counts(matcher.labels().size(), 0);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    matcher.scan(corpus.tokens(d), [&](const PhraseMatcher::Match& m) { ++counts[m.entry]; });
  }
  std::vector<std::pair<std::string, std::size_t>> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) out.emplace_back(matcher.labels()[i], counts[i]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

inline std::size_t frequency_of(const std::vector<std::pair<std::string, std::size_t>>& freqs,
                                std::string_view place) {
  const auto key = join(folded_tokens(place), " ");
  for (const auto& [label, count] : freqs) {
    if (join(folded_tokens(label), " ") == key) return count;
  }
  return 0;
}

}  // namespace spatialrel

#endif  // SPATIALREL_CORPUS_HPP
