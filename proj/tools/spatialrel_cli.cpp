// spatialrel: command-line front end for the extraction pipeline.
//
// Exit codes: 0 success, 1 config error, 2 backend failure, 3 evaluation error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spatialrel/spatialrel.hpp"

namespace {

using namespace spatialrel;

enum ExitCode { kOk = 0, kConfig = 1, kBackend = 2, kEvaluation = 3 };

struct Overrides {
  std::optional<std::string> config_file;
  std::optional<std::string> corpus;
  std::optional<std::string> manifest;
  std::vector<std::string> places;
  std::vector<std::string> nouns;
  std::optional<std::string> relation;
  std::vector<std::string> relation_terms;
  std::optional<std::string> entity;
  std::optional<std::size_t> window;
  std::optional<std::size_t> max_prompt_tokens;
  std::optional<double> bytes_per_token;
  std::optional<std::string> template_file;
  std::optional<bool> not_found_clause;
  std::optional<std::string> backend;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<std::string> api_key_env;
  std::optional<std::string> cassette;
  std::optional<std::string> script;
  std::optional<double> temperature;
  std::optional<std::size_t> max_output_tokens;
  std::optional<std::size_t> timeout;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> parallelism;
  std::optional<std::size_t> threads;
  std::optional<std::string> gold;
  std::optional<std::string> policy;
  std::optional<std::string> out;
};

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config_file ? load_config(*o.config_file) : PipelineConfig{};
  if (o.corpus) c.corpus_root = *o.corpus;
  if (o.manifest) c.manifest = *o.manifest;
  if (!o.places.empty()) c.place_files.assign(o.places.begin(), o.places.end());
  if (!o.nouns.empty()) c.noun_files.assign(o.nouns.begin(), o.nouns.end());
  if (o.relation) c.relation = *o.relation;
  if (!o.relation_terms.empty()) c.relation_terms = o.relation_terms;
  if (o.entity) c.entity = *o.entity;
  if (o.window) c.window = *o.window;
  if (o.max_prompt_tokens) c.max_prompt_tokens = *o.max_prompt_tokens;
  if (o.bytes_per_token) c.bytes_per_token = *o.bytes_per_token;
  if (o.template_file) c.template_file = *o.template_file;
  if (o.not_found_clause) c.not_found_clause = *o.not_found_clause;
  if (o.backend) c.backend = *parse_backend_kind(*o.backend);
  if (o.endpoint) c.endpoint = *o.endpoint;
  if (o.model) c.model = *o.model;
  if (o.api_key_env) c.api_key_env = *o.api_key_env;
  if (o.cassette) c.cassette = *o.cassette;
  if (o.script) c.script = *o.script;
  if (o.temperature) c.temperature = *o.temperature;
  if (o.max_output_tokens) c.max_output_tokens = *o.max_output_tokens;
  if (o.timeout) c.timeout_seconds = *o.timeout;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.parallelism) c.parallelism = *o.parallelism;
  if (o.threads) c.threads = *o.threads;
  if (o.gold) c.gold = *o.gold;
  if (o.policy) {
    c.policy = *o.policy == "valid_only" ? DenominatorPolicy::valid_only : DenominatorPolicy::all_parsed;
  }
  if (o.out) c.output_dir = *o.out;
  return c;
}

int exit_code_for(const Error& e) {
  if (e.kind() == ErrorKind::evaluation) return kEvaluation;
  if (e.is_backend()) return kBackend;
  return kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extract qualitative spatial relations between places from a text corpus"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("-c,--config", o.config_file, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--corpus", o.corpus, "Directory of .txt documents");
  app.add_option("--manifest", o.manifest, "Manifest: id<TAB>filename[<TAB>encoding]");
  app.add_option("--places", o.places, "Place-name gazetteer file(s)");
  app.add_option("--nouns", o.nouns, "Geographic noun list file(s)");
  app.add_option("--relation", o.relation, "Relation term (default near)");
  app.add_option("--relation-terms", o.relation_terms, "Terms counted by stats");
  app.add_option("--entity", o.entity, "Target place entity");
  app.add_option("--window", o.window, "KWIC window in tokens (default 15)")->check(CLI::PositiveNumber);
  app.add_option("--max-prompt-tokens", o.max_prompt_tokens, "Prompt token budget")->check(CLI::PositiveNumber);
  app.add_option("--bytes-per-token", o.bytes_per_token, "Token estimate scale factor");
  app.add_option("--template", o.template_file, "Prompt template with {relation} {entity} {passages}");
  app.add_option("--not-found-clause", o.not_found_clause, "Ask the model to answer \"not found\"");
  app.add_option("--backend", o.backend, "http, replay or scripted")
      ->check(CLI::IsMember({"http", "replay", "scripted"}));
  app.add_option("--endpoint", o.endpoint, "OpenAI-compatible base URL");
  app.add_option("--model", o.model, "Model name");
  app.add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
  app.add_option("--cassette", o.cassette, "Cassette file (JSON Lines)");
  app.add_option("--script", o.script, "Scripted responses (JSON array of strings)");
  app.add_option("--temperature", o.temperature, "Sampling temperature (default 0)");
  app.add_option("--max-output-tokens", o.max_output_tokens, "Response token cap (default 1024)");
  app.add_option("--timeout", o.timeout, "Per-request timeout in seconds (default 60)");
  app.add_option("--iterations", o.iterations, "Extraction iterations (default 2)")->check(CLI::PositiveNumber);
  app.add_option("--parallelism", o.parallelism, "Requests in flight (default 2)")->check(CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "Corpus tokenization threads");
  app.add_option("--gold", o.gold, "Gold standard CSV");
  app.add_option("--policy", o.policy, "Precision denominator: all_parsed or valid_only")
      ->check(CLI::IsMember({"all_parsed", "valid_only"}));
  app.add_option("-o,--out", o.out, "Output directory");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  auto* kwic = app.add_subcommand("kwic", "Keyword-in-context search for the relation term");
  auto* freq = app.add_subcommand("freq", "Place-name frequencies");
  auto* extract = app.add_subcommand("extract", "Prompt the model and parse triples");
  auto* eval = app.add_subcommand("eval", "Score triples against a gold standard");
  std::vector<std::string> eval_triples;
  eval->add_option("--triples", eval_triples, "Triples CSV per iteration (default out/triples.iterN.csv)");
  auto* graph = app.add_subcommand("graph", "Export the triple graph");
  std::string graph_triples;
  graph->add_option("--triples", graph_triples, "Triples CSV (default out/triples.iter1.csv)");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const PipelineConfig config = resolve(o);
    if (pipeline->parsed()) {
      cmd_pipeline(config);
      std::cout << "pipeline outputs written to " << config.output_dir.string() << "\n";
      return kOk;
    }

    const bool needs_backend = extract->parsed();
    validate_config(config, needs_backend);
    const Workspace ws(config);

    if (stats->parsed()) {
      std::cout << stats_to_table(cmd_stats(ws));
    } else if (kwic->parsed()) {
      const auto r = cmd_kwic(ws);
      std::cout << hits_to_table(config.entity.empty() ? r.hits : r.contexts);
      std::cout << r.hits.size() << " hits";
      if (!config.entity.empty()) std::cout << ", " << r.contexts.size() << " mention " << config.entity;
      std::cout << "\n";
    } else if (freq->parsed()) {
      for (const auto& [place, n] : cmd_freq(ws)) std::cout << place << "\t" << n << "\n";
    } else if (extract->parsed()) {
      const auto contexts = filter_by_cooccurrence(kwic_search(ws.corpus(), config.relation, config.window),
                                                   config.entity);
      const auto r = cmd_extract(ws, contexts);
      for (std::size_t i = 0; i < r.iterations.size(); ++i) {
        std::cout << "iteration " << i + 1 << ": " << r.iterations[i].size() << " triples\n";
      }
    } else if (eval->parsed()) {
      if (!config.gold) throw Error(ErrorKind::config, "eval requires --gold");
      std::vector<std::filesystem::path> paths(eval_triples.begin(), eval_triples.end());
      std::cout << report_to_table(cmd_eval(ws, *config.gold, paths));
    } else if (graph->parsed()) {
      const auto path = graph_triples.empty() ? config.output_dir / "triples.iter1.csv"
                                              : std::filesystem::path(graph_triples);
      const auto g = cmd_graph(ws, path);
      std::cout << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
    }
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
