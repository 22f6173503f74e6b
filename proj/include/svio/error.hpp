#pragma once

#include <stdexcept>
#include <string>

namespace svio {

enum class ErrorKind {
  kInvalidArgument,
  kEmptyInput,
  kMalformedStream,
  kRankDeficient,
  kRegistrationFailure,
  kNotConverged,
  kTrustRegion,
  kParse,
  kFormat,
  kConfig,
  kIo,
  kNumeric,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kMalformedStream: return "malformed-stream";
    case ErrorKind::kRankDeficient: return "rank-deficient";
    case ErrorKind::kRegistrationFailure: return "registration-failure";
    case ErrorKind::kNotConverged: return "not-converged";
    case ErrorKind::kTrustRegion: return "trust-region";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

/// Base of every exception thrown by the library. `kind()` lets callers map
/// failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure with file and (1-based) line/row position.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(ErrorKind::kParse,
              file + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                  ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  long line() const noexcept { return line_; }

 private:
  std::string file_;
  long line_;
};

}  // namespace svio
