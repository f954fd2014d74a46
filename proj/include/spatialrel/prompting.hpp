#ifndef SPATIALREL_PROMPTING_HPP
#define SPATIALREL_PROMPTING_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "concordance.hpp"
#include "error.hpp"

namespace spatialrel {

inline constexpr std::string_view kDefaultInstructionTemplate =
    "From the given passages numbered in brackets (), extract spatial relation "
    "\"{relation}\" only if the entity '{entity}' is involved in a relation with "
    "other entities. The output should be in the form <subject, spatial relation, "
    "object>.{passages}";

inline constexpr std::string_view kNotFoundClause =
    " Otherwise, respond \"not found\" if no confident relation is present.";

struct PromptSpec {
  std::string relation = "near";
  std::string entity;
  std::string instruction_template{kDefaultInstructionTemplate};
  bool include_not_found_clause = false;
  std::size_t max_prompt_tokens = 4096;
  double bytes_per_token = 4.0;  // estimate_tokens scale factor
};

struct PassageRef {
  std::size_t number = 0;  // 1-based position in the full filtered hit list
  KwicHit hit;
};

struct PromptBatch {
  std::size_t batch_index = 0;
  std::vector<PassageRef> passage_refs;
  std::string content;
};

/// Character-count proxy for model tokens: ceil(bytes / bytes_per_token).
/// Real tokenizers average close to four bytes per token on English prose,
/// so the default tends to overestimate slightly.
inline std::size_t estimate_tokens(std::string_view text, double bytes_per_token = 4.0) {
  if (text.empty()) return 0;
  if (!(bytes_per_token > 0)) throw Error(ErrorKind::config, "bytes_per_token must be positive");
  return static_cast<std::size_t>(std::ceil(static_cast<double>(text.size()) / bytes_per_token));
}

namespace detail {

inline std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

inline void replace_once(std::string& s, std::string_view placeholder, std::string_view value) {
  const auto pos = s.find(placeholder);
  if (pos != std::string::npos) s.replace(pos, placeholder.size(), value);
}

/// Template with relation, entity and the optional clause filled in, split
/// around the passages slot.
struct RenderedFrame {
  std::string prefix;
  std::string suffix;
};

inline RenderedFrame render_frame(const PromptSpec& spec) {
  for (const std::string_view ph : {"{relation}", "{entity}", "{passages}"}) {
    if (count_occurrences(spec.instruction_template, ph) != 1) {
      throw Error(ErrorKind::config,
                  "prompt template must contain " + std::string(ph) + " exactly once");
    }
  }
  if (spec.max_prompt_tokens == 0) throw Error(ErrorKind::config, "max_prompt_tokens must be positive");

  std::string t = spec.instruction_template;
  // Fill {passages} last so substituted values cannot introduce placeholders.
  const auto slot = t.find("{passages}");
  std::string prefix = t.substr(0, slot);
  std::string suffix = t.substr(slot + std::string_view("{passages}").size());
  for (std::string* part : {&prefix, &suffix}) {
    replace_once(*part, "{relation}", spec.relation);
    replace_once(*part, "{entity}", spec.entity);
  }
  if (spec.include_not_found_clause) prefix += kNotFoundClause;
  return {std::move(prefix), std::move(suffix)};
}

inline std::string numbered_passage(std::size_t local_number, const KwicHit& hit) {
  return "(" + std::to_string(local_number) + ")" + hit.rendered;
}

}  // namespace detail

/// The instruction alone, with an empty passage slot.
inline std::string render_instruction(const PromptSpec& spec) {
  auto frame = detail::render_frame(spec);
  return frame.prefix + frame.suffix;
}

/// Greedily packs passages into prompts that stay within the token budget.
/// Numbering restarts at (1) in every batch; PassageRef keeps the global
/// number.
inline std::vector<PromptBatch> build_prompts(const std::vector<KwicHit>& hits,
                                              const PromptSpec& spec) {
  if (hits.empty()) throw Error(ErrorKind::input, "no passages to prompt with");
  const auto frame = detail::render_frame(spec);
  const std::size_t overhead = frame.prefix.size() + frame.suffix.size();
  if (estimate_tokens(frame.prefix + frame.suffix, spec.bytes_per_token) >= spec.max_prompt_tokens) {
    throw Error(ErrorKind::config, "max_prompt_tokens does not exceed the instruction overhead");
  }

  std::vector<PromptBatch> batches;
  PromptBatch current;
  std::string passages;

  auto fits = [&](std::size_t passage_bytes) {
    const std::size_t bytes = overhead + passage_bytes;
    return static_cast<std::size_t>(std::ceil(static_cast<double>(bytes) / spec.bytes_per_token)) <=
           spec.max_prompt_tokens;
  };
  auto close_batch = [&] {
    current.batch_index = batches.size();
    current.content = frame.prefix + passages + frame.suffix;
    batches.push_back(std::move(current));
    current = PromptBatch{};
    passages.clear();
  };

  for (std::size_t i = 0; i < hits.size(); ++i) {
    const std::size_t local = current.passage_refs.size() + 1;
    std::string piece = detail::numbered_passage(local, hits[i]);
    const std::size_t extra = piece.size() + (passages.empty() ? 0 : 1);
    if (!current.passage_refs.empty() && !fits(passages.size() + extra)) {
      close_batch();
      piece = detail::numbered_passage(1, hits[i]);
    }
    if (current.passage_refs.empty() && !fits(piece.size())) {
      throw Error(ErrorKind::input, "passage " + std::to_string(i + 1) + " (" + hits[i].doc_id +
                                        ":" + std::to_string(hits[i].match_index) +
                                        ") alone exceeds max_prompt_tokens");
    }
    if (!passages.empty()) passages += ' ';
    passages += piece;
    current.passage_refs.push_back({i + 1, hits[i]});
  }
  close_batch();
  return batches;
}

inline nlohmann::ordered_json to_json(const PromptBatch& batch) {
  nlohmann::ordered_json j;
  j["batch_index"] = batch.batch_index;
  auto refs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < batch.passage_refs.size(); ++k) {
    const auto& ref = batch.passage_refs[k];
    nlohmann::ordered_json r;
    r["local_number"] = k + 1;
    r["passage_number"] = ref.number;
    r["doc_id"] = ref.hit.doc_id;
    r["match_index"] = ref.hit.match_index;
    refs.push_back(std::move(r));
  }
  j["passages"] = std::move(refs);
  j["content"] = batch.content;
  return j;
}

inline std::string batches_to_json(const std::vector<PromptBatch>& batches) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : batches) arr.push_back(to_json(b));
  return arr.dump(2) + "\n";
}

}  // namespace spatialrel

#endif  // SPATIALREL_PROMPTING_HPP
