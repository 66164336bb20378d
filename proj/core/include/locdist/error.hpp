#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace locdist {

enum class Errc {
  invalid_argument,
  invalid_config,
  dimension_mismatch,
  insufficient_history,
  degenerate_probe,
  degenerate_input,
  sync_failure,
  trace_too_short,
  missing_hypothesis,
  unreachable_target,
  invalid_grid,
  parse_error,
  version_unsupported,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception. Every failure raised by locdist carries a code so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Trace/CSV file failures; `line` is 1-based, 0 when not tied to a line.
class FileError : public Error {
 public:
  FileError(Errc code, std::string path, std::size_t line, const std::string& what);
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace locdist
