#ifndef SPATIALREL_TEXT_HPP
#define SPATIALREL_TEXT_HPP

// UTF-8 helpers, case folding and the word tokenizer shared by every module.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace spatialrel {

namespace utf8 {

inline constexpr char32_t replacement = 0xFFFD;

struct Decoded {
  char32_t code_point;
  std::size_t length;  // bytes consumed, always >= 1
  bool valid;
};

/// Decodes one code point at `pos`. Invalid or truncated sequences consume a
/// single byte and yield U+FFFD.
inline Decoded decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1, true};

  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2; cp = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3; cp = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4; cp = b0 & 0x07; min = 0x10000;
  } else {
    return {replacement, 1, false};
  }
  if (pos + len > s.size()) return {replacement, 1, false};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {replacement, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {replacement, 1, false};
  }
  return {cp, len, true};
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Byte offset of the first invalid sequence, or npos when `s` is valid.
inline std::size_t find_invalid(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    const Decoded d = decode(s, pos);
    if (!d.valid) return pos;
    pos += d.length;
  }
  return std::string_view::npos;
}

inline std::string from_latin1(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (const char c : bytes) append(out, static_cast<unsigned char>(c));
  return out;
}

}  // namespace utf8

/// Letters and digits. ASCII is exact; outside ASCII, letter-bearing blocks
/// (Latin, Greek, Cyrillic, combining marks, CJK and beyond) count as word
/// characters while the punctuation and symbol blocks do not.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp < 0x2000) return cp != 0x37E && cp != 0x387;  // Greek ; and ·
  if (cp < 0x2C00) return false;                        // punctuation, symbols
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;       // supplemental punct.
  if (cp >= 0x3000 && cp <= 0x303F) return false;       // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp == utf8::replacement) return false;
  return true;
}

inline bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

inline char32_t fold_code_point(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
      return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

/// Simple case folding. Exact for ASCII; covers Latin-1, Latin Extended-A,
/// Greek and Cyrillic capitals. Other code points pass through unchanged.
inline std::string case_fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    const auto d = utf8::decode(s, pos);
    if (d.valid) {
      utf8::append(out, fold_code_point(d.code_point));
    } else {
      out.push_back(s[pos]);
    }
    pos += d.length;
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  return case_fold(a) == case_fold(b);
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Trims and replaces every internal whitespace run with one space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (const char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

/// One word token. `text` is the original slice; `folded` is used for every
/// comparison.
struct TokenSpan {
  std::string text;
  std::string folded;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
  std::size_t index = 0;
};

/// Splits `body` into maximal runs of letters and digits. An apostrophe or
/// hyphen joins the run only when a word character sits on both sides, so
/// "church-yard" and "o'er" stay whole while "rivers'" loses its apostrophe.
inline std::vector<TokenSpan> tokenize(std::string_view body) {
  std::vector<TokenSpan> tokens;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  std::size_t end = 0;

  auto flush = [&] {
    if (start == std::string_view::npos) return;
    TokenSpan t;
    t.text = std::string(body.substr(start, end - start));
    t.folded = case_fold(t.text);
    t.byte_start = start;
    t.byte_end = end;
    t.index = tokens.size();
    tokens.push_back(std::move(t));
    start = std::string_view::npos;
  };

  while (pos < body.size()) {
    const auto d = utf8::decode(body, pos);
    if (d.valid && is_word_char(d.code_point)) {
      if (start == std::string_view::npos) start = pos;
      pos += d.length;
      end = pos;
      continue;
    }
    const bool joiner = d.valid && (is_apostrophe(d.code_point) || d.code_point == '-');
    if (joiner && start != std::string_view::npos && end == pos) {
      const std::size_t next = pos + d.length;
      if (next < body.size()) {
        const auto n = utf8::decode(body, next);
        if (n.valid && is_word_char(n.code_point)) {
          pos = next;
          continue;  // run continues; `end` advances with the next letter
        }
      }
    }
    flush();
    pos += d.length;
  }
  flush();
  return tokens;
}

/// Case-folded token texts only.
inline std::vector<std::string> folded_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.folded));
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace spatialrel

#endif  // SPATIALREL_TEXT_HPP
