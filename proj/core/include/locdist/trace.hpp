#pragma once

// Line-oriented trace files. Line 1 is a JSON header; every following line is
// one measurement record {"n", "t", "pos": [x, y], "h": k1 x k2 x M [re, im]}.
// Numbers are written with 17 significant digits so values round-trip exactly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "locdist/chanmodel.hpp"
#include "locdist/sigmetric.hpp"

namespace locdist {

enum class TraceKind { snapshot, signature };

struct TraceHeader {
  int format_version = 1;
  int k1 = 1;
  int k2 = 1;
  int M = 1;
  double sample_period_s = 0.0;
  double carrier_hz = 0.0;
  std::int64_t record_count = 0;
  TraceKind kind = TraceKind::snapshot;
  /// Only for signature traces.
  std::optional<SignatureKind> signature_kind;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct TraceRecord {
  std::int64_t n = 0;
  double t = 0.0;
  Vec2 pos;
  std::vector<CVec> h;  ///< k1*k2 pairs, row-major (tx, rx), M values each

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceFile {
  TraceHeader header;
  std::vector<TraceRecord> records;

  friend bool operator==(const TraceFile&, const TraceFile&) = default;
};

void write_trace(std::ostream& out, const TraceFile& trace);
void write_trace(const std::string& path, const TraceFile& trace);

/// `source` names the input in error messages. Failures are FileError with the
/// 1-based line number.
TraceFile read_trace(std::istream& in, const std::string& source);
TraceFile read_trace(const std::string& path);

/// Snapshot trace; t = meas_index * probe_interval_s.
TraceFile trace_from_snapshots(const std::vector<ChannelSnapshot>& snapshots, double carrier_hz,
                               double probe_interval_s);
std::vector<ChannelSnapshot> snapshots_from_trace(const TraceFile& trace);

TraceFile trace_from_signatures(const std::vector<LinkSignature>& signatures, double sample_period_s,
                                double carrier_hz, double probe_interval_s);

/// Signatures of every record: snapshot traces yield the requested kind,
/// signature traces must already hold it.
std::vector<LinkSignature> signatures_from_trace(const TraceFile& trace, SignatureKind kind);

}  // namespace locdist
