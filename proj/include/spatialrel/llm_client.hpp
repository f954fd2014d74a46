#ifndef SPATIALREL_LLM_CLIENT_HPP
#define SPATIALREL_LLM_CLIENT_HPP

// Chat-completion transport. This header is the only place in the library
// that performs network I/O.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "parallel.hpp"

namespace spatialrel {

using LogSink = std::function<void(std::string_view)>;

inline LogSink stderr_log() {
  return [](std::string_view line) { std::clog << line << '\n'; };
}

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct CompletionRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  std::size_t max_output_tokens = 1024;
};

inline CompletionRequest make_request(std::string model, std::string prompt,
                                      double temperature = 0.0,
                                      std::size_t max_output_tokens = 1024) {
  return {std::move(model), {{"user", std::move(prompt)}}, temperature, max_output_tokens};
}

enum class FinishReason { stop, length, filtered, error };

inline std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::filtered: return "filtered";
    case FinishReason::error: return "error";
  }
  return "error";
}

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t output_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct CompletionResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::stop;
  std::optional<Usage> usage;

  bool operator==(const CompletionResponse&) const = default;
};

/// SHA-256 over model, temperature and every message, so any prompt edit
/// yields a new fingerprint.
inline std::string fingerprint(const CompletionRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model;
  j["temperature"] = request.temperature;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) msgs.push_back({m.role, m.content});
  j["messages"] = std::move(msgs);
  return sha256_hex(j.dump());
}

inline nlohmann::ordered_json to_json(const CompletionResponse& r) {
  nlohmann::ordered_json j;
  j["content"] = r.content;
  j["finish_reason"] = std::string(to_string(r.finish_reason));
  if (r.usage) {
    j["usage"] = {{"prompt_tokens", r.usage->prompt_tokens},
                  {"output_tokens", r.usage->output_tokens}};
  }
  return j;
}

inline CompletionResponse response_from_json(const nlohmann::json& j) {
  CompletionResponse r;
  r.content = j.at("content").get<std::string>();
  const auto reason = j.at("finish_reason").get<std::string>();
  if (reason == "stop") r.finish_reason = FinishReason::stop;
  else if (reason == "length") r.finish_reason = FinishReason::length;
  else if (reason == "filtered") r.finish_reason = FinishReason::filtered;
  else if (reason == "error") r.finish_reason = FinishReason::error;
  else throw Error(ErrorKind::malformed_response, "unknown finish_reason '" + reason + "'");
  if (j.contains("usage") && !j["usage"].is_null()) {
    r.usage = Usage{j["usage"].at("prompt_tokens").get<std::size_t>(),
                    j["usage"].at("output_tokens").get<std::size_t>()};
  }
  return r;
}

/// Ordered request-fingerprint → response store, persisted as JSON Lines.
class Cassette {
 public:
  struct Record {
    std::string fingerprint;
    CompletionResponse response;
  };

  static Cassette load(const std::filesystem::path& path) {
    Cassette c;
    if (!std::filesystem::exists(path)) return c;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        c.put(j.at("fingerprint").get<std::string>(), response_from_json(j.at("response")));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::input,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return c;
  }

  std::string dump() const {
    std::string out;
    for (const auto& r : records_) {
      nlohmann::ordered_json j;
      j["fingerprint"] = r.fingerprint;
      j["response"] = to_json(r.response);
      out += j.dump() + "\n";
    }
    return out;
  }

  void save(const std::filesystem::path& path) const { write_file(path, dump()); }

  const CompletionResponse* find(std::string_view fp) const {
    const auto it = index_.find(std::string(fp));
    return it == index_.end() ? nullptr : &records_[it->second].response;
  }

  /// Appends, or replaces the response in place when the fingerprint exists.
  void put(const std::string& fp, CompletionResponse response) {
    if (const auto it = index_.find(fp); it != index_.end()) {
      records_[it->second].response = std::move(response);
      return;
    }
    index_.emplace(fp, records_.size());
    records_.push_back({fp, std::move(response)});
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }

 private:
  std::vector<Record> records_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {
inline std::mutex& cassette_write_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Stores `live_response` under the request's fingerprint in the cassette at
/// `cassette_path`. Writes from concurrent callers are serialized.
inline Cassette record(const CompletionRequest& request, const CompletionResponse& live_response,
                       const std::filesystem::path& cassette_path) {
  std::lock_guard lock(detail::cassette_write_mutex());
  auto cassette = Cassette::load(cassette_path);
  cassette.put(fingerprint(request), live_response);
  cassette.save(cassette_path);
  return cassette;
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

inline CompletionResponse complete(const CompletionRequest& request, Backend& backend) {
  return backend.complete(request);
}

/// Serves stored responses only; a missing fingerprint is an error.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    const auto fp = fingerprint(request);
    if (const auto* r = cassette_.find(fp)) return *r;
    throw Error(ErrorKind::cassette_miss, "cassette has no response for fingerprint " + fp);
  }

 private:
  Cassette cassette_;
};

/// Canned responses supplied by the caller.
class ScriptedBackend : public Backend {
 public:
  using Script = std::function<CompletionResponse(const CompletionRequest&)>;

  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  /// Always answers with `content`.
  explicit ScriptedBackend(std::string content)
      : script_([c = std::move(content)](const CompletionRequest&) {
          return CompletionResponse{c, FinishReason::stop, std::nullopt};
        }) {}

  /// Answers by request fingerprint; unknown requests are a cassette miss.
  explicit ScriptedBackend(std::map<std::string, std::string> by_fingerprint)
      : script_([m = std::move(by_fingerprint)](const CompletionRequest& r) {
          const auto fp = fingerprint(r);
          const auto it = m.find(fp);
          if (it == m.end()) {
            throw Error(ErrorKind::cassette_miss, "no scripted response for fingerprint " + fp);
          }
          return CompletionResponse{it->second, FinishReason::stop, std::nullopt};
        }) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    return script_(request);
  }

 private:
  Script script_;
};

/// Forwards to another backend and records every response it returns.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, std::filesystem::path cassette_path)
      : inner_(inner), path_(std::move(cassette_path)) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    auto response = inner_.complete(request);
    record(request, response, path_);
    return response;
  }

 private:
  Backend& inner_;
  std::filesystem::path path_;
};

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::size_t max_attempts = 5;

  /// Delay after the given failed attempt (1-based).
  std::chrono::milliseconds delay_after(std::size_t attempt) const {
    double ms = static_cast<double>(base_delay.count());
    for (std::size_t i = 1; i < attempt; ++i) ms *= factor;
    return std::chrono::milliseconds(static_cast<long long>(ms));
  }
};

struct HttpConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::chrono::seconds timeout{60};
  RetryPolicy retry;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  LogSink log = stderr_log();
};

/// Parses an OpenAI-compatible chat-completions body.
inline CompletionResponse parse_chat_completion(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& choice = j.at("choices").at(0);
    const auto& message = choice.at("message");
    CompletionResponse r;
    const bool has_content = message.contains("content") && message["content"].is_string();
    if (has_content) r.content = message["content"].get<std::string>();

    std::string reason;
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      reason = choice["finish_reason"].get<std::string>();
    }
    if (reason == "stop" || (reason.empty() && has_content)) r.finish_reason = FinishReason::stop;
    else if (reason == "length") r.finish_reason = FinishReason::length;
    else if (reason == "content_filter") r.finish_reason = FinishReason::filtered;
    else r.finish_reason = FinishReason::error;

    if (r.finish_reason == FinishReason::stop && !has_content) {
      throw Error(ErrorKind::malformed_response, "finish_reason stop without message content");
    }
    if (j.contains("usage") && j["usage"].is_object()) {
      const auto& u = j["usage"];
      r.usage = Usage{u.value("prompt_tokens", std::size_t{0}),
                      u.value("completion_tokens", std::size_t{0})};
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::malformed_response, std::string("malformed completion body: ") + e.what());
  }
}

inline std::string chat_completion_body(const CompletionRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) {
    msgs.push_back(nlohmann::ordered_json{{"role", m.role}, {"content", m.content}});
  }
  j["messages"] = std::move(msgs);
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_output_tokens;
  return j.dump();
}

/// POSTs to <endpoint>/chat/completions with a bearer key. 429 and 5xx
/// responses (and connection failures) are retried with exponential backoff.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) {
      throw Error(ErrorKind::missing_credentials, "no API key configured for the http backend");
    }
    split_endpoint();
  }

  CompletionResponse complete(const CompletionRequest& request) override {
    const auto body = chat_completion_body(request);
    const httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
    std::string last_failure;
    bool last_was_status = false;

    for (std::size_t attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
      httplib::Client client(origin_);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);

      const auto res = client.Post(path_, headers, body, "application/json");
      if (res && res->status >= 200 && res->status < 300) {
        log("http: attempt " + std::to_string(attempt) + " succeeded (status " +
            std::to_string(res->status) + ")");
        return parse_chat_completion(res->body);
      }
      if (res) {
        last_was_status = true;
        last_failure = "status " + std::to_string(res->status);
        if (res->status != 429 && res->status < 500) {
          throw Error(ErrorKind::http_status, "http: non-retryable " + last_failure + ": " +
                                                  res->body.substr(0, 200));
        }
      } else {
        last_was_status = false;
        last_failure = "transport error: " + httplib::to_string(res.error());
      }
      if (attempt == config_.retry.max_attempts) break;
      const auto delay = config_.retry.delay_after(attempt);
      log("http: attempt " + std::to_string(attempt) + " failed (" + last_failure +
          "), retrying in " + std::to_string(delay.count()) + "ms");
      config_.sleep(delay);
    }
    throw Error(last_was_status ? ErrorKind::http_status : ErrorKind::transport,
                "http: giving up after " + std::to_string(config_.retry.max_attempts) +
                    " attempts (" + last_failure + ")");
  }

  const std::string& origin() const { return origin_; }
  const std::string& path() const { return path_; }

 private:
  void split_endpoint() {
    const auto& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (url.empty() || scheme_end == std::string::npos) {
      throw Error(ErrorKind::config, "endpoint must be an absolute http(s) URL: '" + url + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    std::string base = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!base.empty() && base.back() == '/') base.pop_back();
    constexpr std::string_view route = "/chat/completions";
    if (base.size() >= route.size() && base.compare(base.size() - route.size(), route.size(), route) == 0) {
      path_ = base;
    } else {
      path_ = base + std::string(route);
    }
  }

  void log(const std::string& line) const {
    if (config_.log) config_.log(line);
  }

  HttpConfig config_;
  std::string origin_;
  std::string path_;
};

struct CompletionOutcome {
  std::optional<CompletionResponse> response;
  std::optional<Error> error;
};

/// Runs every request with at most `parallelism` in flight. Results come
/// back in request order whatever order they complete in; failures are
/// captured per request rather than thrown.
inline std::vector<CompletionOutcome> complete_all(const std::vector<CompletionRequest>& requests,
                                                   Backend& backend, std::size_t parallelism = 2) {
  std::vector<CompletionOutcome> outcomes(requests.size());
  detail::parallel_for(requests.size(), parallelism, [&](std::size_t i) {
    try {
      outcomes[i].response = backend.complete(requests[i]);
    } catch (const Error& e) {
      outcomes[i].error = e;
    } catch (const std::exception& e) {
      outcomes[i].error = Error(ErrorKind::transport, e.what());
    }
  });
  return outcomes;
}

}  // namespace spatialrel

#endif  // SPATIALREL_LLM_CLIENT_HPP
