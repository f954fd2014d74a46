#ifndef SPATIALREL_ERROR_HPP
#define SPATIALREL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatialrel {

/// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  config,             // bad configuration or argument
  io,                 // unreadable / unwritable file
  input,              // malformed input data (corpus, gazetteer, CSV)
  missing_credentials,
  cassette_miss,
  http_status,        // non-retryable HTTP status, or retries exhausted
  transport,          // connection-level failure
  malformed_response,
  evaluation,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::input: return "input";
    case ErrorKind::missing_credentials: return "missing_credentials";
    case ErrorKind::cassette_miss: return "cassette_miss";
    case ErrorKind::http_status: return "http_status";
    case ErrorKind::transport: return "transport";
    case ErrorKind::malformed_response: return "malformed_response";
    case ErrorKind::evaluation: return "evaluation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures that originate at the model backend.
  bool is_backend() const noexcept {
    switch (kind_) {
      case ErrorKind::missing_credentials:
      case ErrorKind::cassette_miss:
      case ErrorKind::http_status:
      case ErrorKind::transport:
      case ErrorKind::malformed_response:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace spatialrel

#endif  // SPATIALREL_ERROR_HPP
