#include "locdist/error.hpp"

namespace locdist {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_config: return "invalid-config";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::insufficient_history: return "insufficient-history";
    case Errc::degenerate_probe: return "degenerate-probe";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::sync_failure: return "sync-failure";
    case Errc::trace_too_short: return "trace-too-short";
    case Errc::missing_hypothesis: return "missing-hypothesis";
    case Errc::unreachable_target: return "unreachable-target";
    case Errc::invalid_grid: return "invalid-grid";
    case Errc::parse_error: return "parse-error";
    case Errc::version_unsupported: return "version-unsupported";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

FileError::FileError(Errc code, std::string path, std::size_t line, const std::string& what)
    : Error(code, what), path_(std::move(path)), line_(line) {}

void fail(Errc code, const std::string& what) { throw Error(code, std::string(to_string(code)) + ": " + what); }

}  // namespace locdist
