#ifndef SPATIALREL_PIPELINE_HPP
#define SPATIALREL_PIPELINE_HPP

// End-to-end orchestration: gazetteer-driven corpus statistics, concordance,
// prompting, extraction, evaluation and graph export. Each command writes
// its artifacts into the configured output directory.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "concordance.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "hash.hpp"
#include "llm_client.hpp"
#include "prompting.hpp"
#include "triples.hpp"

namespace spatialrel {

enum class BackendKind { http, replay, scripted };

inline std::optional<BackendKind> parse_backend_kind(std::string_view s) {
  if (s == "http") return BackendKind::http;
  if (s == "replay") return BackendKind::replay;
  if (s == "scripted") return BackendKind::scripted;
  return std::nullopt;
}

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::http: return "http";
    case BackendKind::replay: return "replay";
    case BackendKind::scripted: return "scripted";
  }
  return "http";
}

struct PipelineConfig {
  std::filesystem::path corpus_root;
  std::optional<std::filesystem::path> manifest;
  std::vector<std::filesystem::path> place_files;
  std::vector<std::filesystem::path> noun_files;

  std::string relation = "near";
  std::vector<std::string> relation_terms;  // empty: just `relation`
  std::string entity;
  std::size_t window = 15;

  std::size_t max_prompt_tokens = 4096;
  double bytes_per_token = 4.0;
  std::optional<std::filesystem::path> template_file;
  bool not_found_clause = false;

  BackendKind backend = BackendKind::replay;
  std::string endpoint;
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";
  std::optional<std::filesystem::path> cassette;
  std::optional<std::filesystem::path> script;
  double temperature = 0.0;
  std::size_t max_output_tokens = 1024;
  std::size_t timeout_seconds = 60;
  std::size_t iterations = 2;
  std::size_t parallelism = 2;
  std::size_t threads = 1;

  std::optional<std::filesystem::path> gold;
  DenominatorPolicy policy = DenominatorPolicy::all_parsed;

  std::filesystem::path output_dir = "out";
  LogSink log = stderr_log();

  std::vector<std::string> effective_relation_terms() const {
    return relation_terms.empty() ? std::vector<std::string>{relation} : relation_terms;
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <typename T>
T ini_get(const boost::property_tree::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const boost::property_tree::ptree_error& e) {
    throw Error(ErrorKind::config, "config key '" + key + "': " + e.what());
  }
}

inline bool parse_flag(const std::string& key, std::string_view value) {
  const auto f = case_fold(trim(value));
  if (f == "true" || f == "1" || f == "yes" || f == "on") return true;
  if (f == "false" || f == "0" || f == "no" || f == "off") return false;
  throw Error(ErrorKind::config, "config key '" + key + "' expects a boolean");
}

}  // namespace detail

/// Reads an INI file with [corpus], [extraction], [backend], [evaluation]
/// and [output] sections. Relative paths resolve against the file's
/// directory. Secrets never live here: the API key comes from the
/// environment variable named by backend.api_key_env.
inline PipelineConfig load_config(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, std::string("cannot read config: ") + e.what());
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  auto opt_path = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    const auto v = tree.get_optional<std::string>(key);
    if (!v || trim(*v).empty()) return std::nullopt;
    return resolve(std::string(trim(*v)));
  };

  PipelineConfig c;
  if (auto root = opt_path("corpus.root")) c.corpus_root = *root;
  c.manifest = opt_path("corpus.manifest");
  for (const auto& p : detail::split_list(tree.get("corpus.places", ""))) c.place_files.push_back(resolve(p));
  for (const auto& p : detail::split_list(tree.get("corpus.nouns", ""))) c.noun_files.push_back(resolve(p));
  c.threads = detail::ini_get(tree, "corpus.threads", c.threads);

  c.relation = tree.get("extraction.relation", c.relation);
  c.relation_terms = detail::split_list(tree.get("extraction.relation_terms", ""));
  c.entity = tree.get("extraction.entity", c.entity);
  c.window = detail::ini_get(tree, "extraction.window", c.window);
  c.max_prompt_tokens = detail::ini_get(tree, "extraction.max_prompt_tokens", c.max_prompt_tokens);
  c.bytes_per_token = detail::ini_get(tree, "extraction.bytes_per_token", c.bytes_per_token);
  c.template_file = opt_path("extraction.template");
  if (auto v = tree.get_optional<std::string>("extraction.not_found_clause")) {
    c.not_found_clause = detail::parse_flag("extraction.not_found_clause", *v);
  }
  c.iterations = detail::ini_get(tree, "extraction.iterations", c.iterations);

  if (auto v = tree.get_optional<std::string>("backend.kind")) {
    const auto k = parse_backend_kind(trim(*v));
    if (!k) throw Error(ErrorKind::config, "backend.kind must be http, replay or scripted");
    c.backend = *k;
  }
  c.endpoint = tree.get("backend.endpoint", c.endpoint);
  c.model = tree.get("backend.model", c.model);
  c.api_key_env = tree.get("backend.api_key_env", c.api_key_env);
  c.cassette = opt_path("backend.cassette");
  c.script = opt_path("backend.script");
  c.temperature = detail::ini_get(tree, "backend.temperature", c.temperature);
  c.max_output_tokens = detail::ini_get(tree, "backend.max_output_tokens", c.max_output_tokens);
  c.timeout_seconds = detail::ini_get(tree, "backend.timeout_seconds", c.timeout_seconds);
  c.parallelism = detail::ini_get(tree, "backend.parallelism", c.parallelism);

  c.gold = opt_path("evaluation.gold");
  if (auto v = tree.get_optional<std::string>("evaluation.policy")) {
    if (trim(*v) == "all_parsed") c.policy = DenominatorPolicy::all_parsed;
    else if (trim(*v) == "valid_only") c.policy = DenominatorPolicy::valid_only;
    else throw Error(ErrorKind::config, "evaluation.policy must be all_parsed or valid_only");
  }
  if (auto out = opt_path("output.dir")) c.output_dir = *out;
  return c;
}

/// Checks the invariants every command relies on.
inline void validate_config(const PipelineConfig& c, bool needs_backend = false) {
  if (c.corpus_root.empty()) throw Error(ErrorKind::config, "no corpus root configured");
  if (!std::filesystem::is_directory(c.corpus_root)) {
    throw Error(ErrorKind::config, "corpus root not found: " + c.corpus_root.string());
  }
  if (c.window < 1) throw Error(ErrorKind::config, "window must be at least 1");
  if (c.iterations < 1) throw Error(ErrorKind::config, "iterations must be at least 1");
  if (c.parallelism < 1) throw Error(ErrorKind::config, "parallelism must be at least 1");
  if (!needs_backend) return;
  if (c.entity.empty()) throw Error(ErrorKind::config, "no target entity configured");
  switch (c.backend) {
    case BackendKind::http:
      if (c.endpoint.empty()) throw Error(ErrorKind::config, "http backend requires an endpoint");
      if (c.api_key_env.empty()) throw Error(ErrorKind::config, "http backend requires api_key_env");
      break;
    case BackendKind::replay:
      if (!c.cassette) throw Error(ErrorKind::config, "replay backend requires a cassette");
      if (!std::filesystem::exists(*c.cassette)) {
        throw Error(ErrorKind::config, "cassette not found: " + c.cassette->string());
      }
      break;
    case BackendKind::scripted:
      if (!c.script) throw Error(ErrorKind::config, "scripted backend requires a script file");
      break;
  }
}

/// Stable digest of every setting that influences outputs. The output
/// directory and log sink are excluded.
inline std::string config_hash(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<std::filesystem::path>& p) {
    return p ? nlohmann::ordered_json(p->generic_string()) : nlohmann::ordered_json(nullptr);
  };
  auto paths = [](const std::vector<std::filesystem::path>& ps) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& p : ps) a.push_back(p.generic_string());
    return a;
  };
  j["corpus_root"] = c.corpus_root.generic_string();
  j["manifest"] = opt(c.manifest);
  j["places"] = paths(c.place_files);
  j["nouns"] = paths(c.noun_files);
  j["relation"] = c.relation;
  j["relation_terms"] = c.effective_relation_terms();
  j["entity"] = c.entity;
  j["window"] = c.window;
  j["max_prompt_tokens"] = c.max_prompt_tokens;
  j["bytes_per_token"] = c.bytes_per_token;
  j["template"] = opt(c.template_file);
  j["not_found_clause"] = c.not_found_clause;
  j["backend"] = std::string(to_string(c.backend));
  j["endpoint"] = c.endpoint;
  j["model"] = c.model;
  j["cassette"] = opt(c.cassette);
  j["script"] = opt(c.script);
  j["temperature"] = c.temperature;
  j["max_output_tokens"] = c.max_output_tokens;
  j["iterations"] = c.iterations;
  j["gold"] = opt(c.gold);
  j["policy"] = std::string(to_string(c.policy));
  return sha256_hex(j.dump());
}

inline std::string corpus_hash(const Corpus& corpus) {
  Sha256 h;
  for (const auto& d : corpus.documents()) {
    h.update(d.id).update(std::string_view("\0", 1)).update(d.body).update(std::string_view("\0", 1));
  }
  return h.hex();
}

inline nlohmann::ordered_json to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["file_count"] = s.file_count;
  j["word_count"] = s.word_count;
  j["unique_word_forms"] = s.unique_word_forms;
  j["named_place_occurrences"] = s.named_place_occurrences;
  j["geographic_noun_occurrences"] = s.geographic_noun_occurrences;
  nlohmann::ordered_json terms = nlohmann::ordered_json::object();
  for (const auto& [term, n] : s.relation_term_occurrences) terms[term] = n;
  j["relation_term_occurrences"] = std::move(terms);
  return j;
}

inline std::string stats_to_table(const CorpusStats& s) {
  std::vector<std::pair<std::string, std::size_t>> rows{
      {"Text Files", s.file_count},
      {"Words", s.word_count},
      {"Unique word forms", s.unique_word_forms},
      {"Named places", s.named_place_occurrences},
      {"Geographic nouns", s.geographic_noun_occurrences},
  };
  for (const auto& [term, n] : s.relation_term_occurrences) rows.emplace_back("\"" + term + "\"", n);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::string out;
  for (const auto& [label, n] : rows) {
    out += label + std::string(width - label.size() + 2, ' ') + std::to_string(n) + "\n";
  }
  return out;
}

/// Loads the corpus and gazetteer named in a config once per command.
class Workspace {
 public:
  explicit Workspace(const PipelineConfig& config)
      : config_(config),
        corpus_(load_corpus(config.corpus_root, config.manifest, config.threads)),
        gazetteer_(load_gazetteer(config.place_files, config.noun_files)) {
    std::filesystem::create_directories(config_.output_dir);
  }

  const PipelineConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  const Gazetteer& gazetteer() const { return gazetteer_; }

  void write(const std::string& name, std::string_view data) const {
    write_file(config_.output_dir / name, data);
  }

  void log(const std::string& line) const {
    if (config_.log) config_.log(line);
  }

 private:
  const PipelineConfig& config_;
  Corpus corpus_;
  Gazetteer gazetteer_;
};

inline CorpusStats cmd_stats(const Workspace& ws) {
  const auto stats = corpus_stats(ws.corpus(), ws.gazetteer(), ws.config().effective_relation_terms(),
                                  ws.config().threads);
  ws.write("stats.json", to_json(stats).dump(2) + "\n");
  ws.write("stats.txt", stats_to_table(stats));
  return stats;
}

struct KwicResult {
  std::vector<KwicHit> hits;
  std::vector<KwicHit> contexts;  // hits mentioning the entity; empty without one
};

inline KwicResult cmd_kwic(const Workspace& ws) {
  KwicResult r;
  r.hits = kwic_search(ws.corpus(), ws.config().relation, ws.config().window);
  ws.write("kwic.jsonl", hits_to_jsonl(r.hits));
  ws.write("kwic.txt", hits_to_table(r.hits));
  if (!ws.config().entity.empty()) {
    r.contexts = filter_by_cooccurrence(r.hits, ws.config().entity);
    std::string numbered;
    for (std::size_t i = 0; i < r.contexts.size(); ++i) {
      auto j = to_json(r.contexts[i]);
      j["passage_number"] = i + 1;
      numbered += j.dump() + "\n";
    }
    ws.write("contexts.jsonl", numbered);
    ws.write("contexts.txt", hits_to_table(r.contexts));
  }
  return r;
}

inline std::vector<std::pair<std::string, std::size_t>> cmd_freq(const Workspace& ws) {
  const auto freqs = place_frequencies(ws.corpus(), ws.gazetteer());
  std::string tsv = "place\tcount\n";
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [place, n] : freqs) {
    tsv += place + "\t" + std::to_string(n) + "\n";
    arr.push_back(nlohmann::ordered_json{{"place", place}, {"count", n}});
  }
  ws.write("freq.tsv", tsv);
  ws.write("freq.json", arr.dump(2) + "\n");
  return freqs;
}

inline PromptSpec prompt_spec(const PipelineConfig& c) {
  PromptSpec spec;
  spec.relation = c.relation;
  spec.entity = c.entity;
  if (c.template_file) spec.instruction_template = read_file(*c.template_file);
  spec.include_not_found_clause = c.not_found_clause;
  spec.max_prompt_tokens = c.max_prompt_tokens;
  spec.bytes_per_token = c.bytes_per_token;
  return spec;
}

/// Script file for the scripted backend: a JSON array of response strings.
/// Request i (in batch order) receives element i modulo the array length.
inline std::map<std::string, std::string> load_script(const std::filesystem::path& path,
                                                      const std::vector<CompletionRequest>& requests) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, "script " + path.string() + ": " + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::config, "script " + path.string() + " must be a non-empty JSON array of strings");
  }
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& item = j[i % j.size()];
    if (!item.is_string()) throw Error(ErrorKind::config, "script entries must be strings");
    out.emplace(fingerprint(requests[i]), item.get<std::string>());
  }
  return out;
}

struct ExtractResult {
  std::vector<PromptBatch> batches;
  std::vector<std::vector<SemanticTriple>> iterations;
  std::size_t failed_requests = 0;
  std::optional<ErrorKind> first_failure;
};

/// Maps parsed triples from one response back to global passage numbers and
/// validates them.
inline std::vector<SemanticTriple> resolve_triples(const ParseReport& report, const PromptBatch& batch,
                                                   const PipelineConfig& c, const LogSink& log) {
  std::vector<SemanticTriple> out;
  for (auto t : report.triples) {
    t.batch_index = batch.batch_index;
    if (t.passage_number) {
      const auto local = *t.passage_number;
      if (local >= 1 && local <= batch.passage_refs.size()) {
        t.passage_number = batch.passage_refs[local - 1].number;
      } else {
        if (log) {
          log("batch " + std::to_string(batch.batch_index) + ": passage label (" +
              std::to_string(local) + ") out of range");
        }
        t.passage_number.reset();
      }
    } else if (batch.passage_refs.size() == 1) {
      t.passage_number = batch.passage_refs.front().number;
    }
    if (t.validity != Validity::malformed) t = validate_triple(std::move(t), c.relation, c.entity);
    out.push_back(std::move(t));
  }
  return out;
}

inline ExtractResult cmd_extract(const Workspace& ws, const std::vector<KwicHit>& contexts) {
  const auto& c = ws.config();
  ExtractResult result;
  result.batches = build_prompts(contexts, prompt_spec(c));
  ws.write("prompts.json", batches_to_json(result.batches));

  std::vector<CompletionRequest> requests;
  for (const auto& b : result.batches) {
    requests.push_back(make_request(c.model, b.content, c.temperature, c.max_output_tokens));
  }

  std::unique_ptr<Backend> inner;
  std::unique_ptr<Backend> recorder;
  Backend* backend = nullptr;
  switch (c.backend) {
    case BackendKind::replay:
      inner = std::make_unique<ReplayBackend>(Cassette::load(*c.cassette));
      backend = inner.get();
      break;
    case BackendKind::scripted:
      inner = std::make_unique<ScriptedBackend>(load_script(*c.script, requests));
      backend = inner.get();
      break;
    case BackendKind::http: {
      HttpConfig hc;
      hc.endpoint = c.endpoint;
      if (const char* key = std::getenv(c.api_key_env.c_str())) hc.api_key = key;
      hc.timeout = std::chrono::seconds(c.timeout_seconds);
      hc.log = c.log;
      inner = std::make_unique<HttpBackend>(std::move(hc));
      recorder = std::make_unique<RecordingBackend>(
          *inner, c.cassette ? *c.cassette : c.output_dir / "cassette.jsonl");
      backend = recorder.get();
      break;
    }
  }

  Cassette used;
  for (std::size_t iter = 1; iter <= c.iterations; ++iter) {
    const auto outcomes = complete_all(requests, *backend, c.parallelism);
    std::vector<SemanticTriple> triples;
    std::string raw;
    for (std::size_t b = 0; b < outcomes.size(); ++b) {
      const auto& batch = result.batches[b];
      nlohmann::ordered_json line;
      line["batch_index"] = batch.batch_index;
      line["fingerprint"] = fingerprint(requests[b]);
      if (!outcomes[b].response) {
        ++result.failed_requests;
        if (!result.first_failure && outcomes[b].error) result.first_failure = outcomes[b].error->kind();
        line["error"] = outcomes[b].error ? outcomes[b].error->what() : "unknown failure";
        ws.log("iteration " + std::to_string(iter) + " batch " + std::to_string(b) +
               ": request failed: " + line["error"].get<std::string>());
        raw += line.dump() + "\n";
        continue;
      }
      const auto& response = *outcomes[b].response;
      line["response"] = to_json(response);
      raw += line.dump() + "\n";
      used.put(fingerprint(requests[b]), response);
      if (response.finish_reason == FinishReason::length) {
        ws.log("iteration " + std::to_string(iter) + " batch " + std::to_string(b) +
               ": response truncated (finish_reason=length); parsing partial content");
      }
      const auto report = parse_triples(response.content);
      for (const auto& s : report.skipped_fragments) {
        ws.log("iteration " + std::to_string(iter) + " batch " + std::to_string(b) +
               ": skipped fragment " + s.raw + " (" + s.detail + ")");
      }
      auto resolved = resolve_triples(report, batch, c, c.log);
      triples.insert(triples.end(), resolved.begin(), resolved.end());
    }
    const auto stem = "triples.iter" + std::to_string(iter);
    ws.write("responses.iter" + std::to_string(iter) + ".jsonl", raw);
    ws.write(stem + ".csv", triples_to_csv(triples));
    ws.write(stem + ".jsonl", triples_to_jsonl(triples));
    result.iterations.push_back(std::move(triples));
  }
  ws.write("cassette.jsonl", used.dump());

  if (result.failed_requests > 0) {
    throw Error(result.first_failure.value_or(ErrorKind::transport),
                std::to_string(result.failed_requests) +
                    " completion request(s) failed; partial outputs kept in " + c.output_dir.string());
  }
  return result;
}

inline std::vector<SemanticTriple> load_triples(const std::filesystem::path& path) {
  return triples_from_csv(read_file(path), path.string());
}

inline std::vector<std::filesystem::path> default_triples_paths(const PipelineConfig& c) {
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 1; i <= c.iterations; ++i) {
    out.push_back(c.output_dir / ("triples.iter" + std::to_string(i) + ".csv"));
  }
  return out;
}

/// Scores iteration triple files against the gold file. Gold or triple
/// problems surface as evaluation errors.
inline EvaluationReport cmd_eval(const Workspace& ws, const std::filesystem::path& gold_path,
                                 std::vector<std::filesystem::path> triples_paths,
                                 std::optional<std::size_t> context_count = std::nullopt) {
  const auto& c = ws.config();
  if (triples_paths.empty()) triples_paths = default_triples_paths(c);
  EvaluationReport report;
  try {
    const auto gold = load_gold(gold_path);
    std::vector<std::vector<SemanticTriple>> iterations;
    for (const auto& p : triples_paths) iterations.push_back(load_triples(p));
    report = evaluate(iterations, gold, c.policy);
  } catch (const Error& e) {
    throw Error(ErrorKind::evaluation, e.what());
  }
  report.place = c.entity;
  if (!c.entity.empty()) {
    report.frequency = frequency_of(place_frequencies(ws.corpus(), ws.gazetteer()), c.entity);
    if (!context_count) {
      context_count = filter_by_cooccurrence(kwic_search(ws.corpus(), c.relation, c.window), c.entity).size();
    }
    report.context_count = context_count;
  }
  ws.write("report.json", to_json(report).dump(2) + "\n");
  ws.write("report.txt", report_to_table(report));
  return report;
}

/// Builds the graph from the valid triples of a triples file.
inline TripleGraph cmd_graph(const Workspace& ws, const std::filesystem::path& triples_path) {
  std::vector<SemanticTriple> valid;
  for (auto& t : load_triples(triples_path)) {
    if (t.validity == Validity::valid) valid.push_back(std::move(t));
  }
  const auto g = build_graph(valid);
  ws.write("graph.gexf", export_graph(g, GraphFormat::gexf));
  ws.write("graph.dot", export_graph(g, GraphFormat::dot));
  ws.write("graph.jsonl", export_graph(g, GraphFormat::jsonl));
  return g;
}

/// Runs every stage and writes manifest.json with provenance hashes.
inline void cmd_pipeline(const PipelineConfig& config) {
  validate_config(config, true);
  const Workspace ws(config);
  cmd_stats(ws);
  cmd_freq(ws);
  const auto kwic = cmd_kwic(ws);
  cmd_extract(ws, kwic.contexts);
  if (config.gold) cmd_eval(ws, *config.gold, {}, kwic.contexts.size());
  cmd_graph(ws, config.output_dir / "triples.iter1.csv");

  nlohmann::ordered_json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["corpus_hash"] = corpus_hash(ws.corpus());
  manifest["cassette_hash"] = sha256_hex(read_file(config.output_dir / "cassette.jsonl"));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(config.output_dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  nlohmann::ordered_json listed = nlohmann::ordered_json::object();
  for (const auto& f : files) listed[f.filename().string()] = sha256_hex(read_file(f));
  manifest["files"] = std::move(listed);
  ws.write("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace spatialrel

#endif  // SPATIALREL_PIPELINE_HPP
