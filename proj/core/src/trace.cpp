#include "locdist/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "locdist/csv.hpp"
#include "locdist/error.hpp"

namespace locdist {

namespace {

using json = nlohmann::json;

void check_shape(const TraceHeader& h, const TraceRecord& r) {
  require(r.h.size() == static_cast<std::size_t>(h.k1 * h.k2), Errc::dimension_mismatch,
          "record " + std::to_string(r.n) + " has " + std::to_string(r.h.size()) + " antenna pairs, header says " +
              std::to_string(h.k1 * h.k2));
  for (const auto& pair : r.h)
    require(pair.size() == static_cast<std::size_t>(h.M), Errc::dimension_mismatch,
            "record " + std::to_string(r.n) + " has " + std::to_string(pair.size()) + " taps, header says " +
                std::to_string(h.M));
}

void validate_header(const TraceHeader& h) {
  require(h.k1 >= 1 && h.k2 >= 1 && h.M >= 1, Errc::invalid_argument, "trace dimensions must be positive");
  require(h.record_count >= 0, Errc::invalid_argument, "negative record count");
  require(h.kind == TraceKind::signature || !h.signature_kind, Errc::invalid_argument,
          "snapshot traces carry no signature kind");
  require(h.kind == TraceKind::snapshot || h.signature_kind.has_value(), Errc::invalid_argument,
          "signature traces need a signature kind");
}

}  // namespace

void write_trace(std::ostream& out, const TraceFile& trace) {
  const auto& h = trace.header;
  validate_header(h);
  require(h.record_count == static_cast<std::int64_t>(trace.records.size()), Errc::invalid_argument,
          "header record_count does not match the number of records");
  for (const auto& r : trace.records) check_shape(h, r);

  out << "{\"format_version\":" << h.format_version << ",\"kind\":\""
      << (h.kind == TraceKind::snapshot ? "snapshot" : "signature") << "\"";
  if (h.signature_kind) out << ",\"signature_kind\":\"" << to_string(*h.signature_kind) << "\"";
  out << ",\"k1\":" << h.k1 << ",\"k2\":" << h.k2 << ",\"M\":" << h.M
      << ",\"sample_period_s\":" << format_double(h.sample_period_s) << ",\"carrier_hz\":" << format_double(h.carrier_hz)
      << ",\"record_count\":" << h.record_count << "}\n";
  for (const auto& r : trace.records) {
    out << "{\"n\":" << r.n << ",\"t\":" << format_double(r.t) << ",\"pos\":[" << format_double(r.pos.x) << ","
        << format_double(r.pos.y) << "],\"h\":[";
    for (int i = 0; i < h.k1; ++i) {
      out << (i ? ",[" : "[");
      for (int j = 0; j < h.k2; ++j) {
        out << (j ? ",[" : "[");
        const auto& pair = r.h[static_cast<std::size_t>(i * h.k2 + j)];
        for (std::size_t k = 0; k < pair.size(); ++k)
          out << (k ? ",[" : "[") << format_double(pair[k].real()) << "," << format_double(pair[k].imag()) << "]";
        out << "]";
      }
      out << "]";
    }
    out << "]}\n";
  }
}

void write_trace(const std::string& path, const TraceFile& trace) {
  std::ostringstream buf;
  write_trace(buf, trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError(Errc::io_error, path, 0, "cannot open for writing: " + path);
  out << buf.str();
  if (!out) throw FileError(Errc::io_error, path, 0, "write failed: " + path);
}

namespace {

[[noreturn]] void file_fail(Errc code, const std::string& source, std::size_t line, const std::string& what) {
  throw FileError(code, source, line,
                  std::string(to_string(code)) + ": " + source + ":" + std::to_string(line) + ": " + what);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) fail(Errc::parse_error, std::string(what) + " is not a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const char* what) {
  if (!j.is_number_integer()) fail(Errc::parse_error, std::string(what) + " is not an integer");
  return j.get<std::int64_t>();
}

const json& field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(Errc::parse_error, std::string("missing field \"") + key + "\"");
  return *it;
}

TraceHeader parse_header(const json& j) {
  if (!j.is_object()) fail(Errc::parse_error, "header is not an object");
  TraceHeader h;
  h.format_version = static_cast<int>(integer(field(j, "format_version"), "format_version"));
  if (h.format_version != 1)
    fail(Errc::version_unsupported, "format_version " + std::to_string(h.format_version) + " is not supported");
  h.k1 = static_cast<int>(integer(field(j, "k1"), "k1"));
  h.k2 = static_cast<int>(integer(field(j, "k2"), "k2"));
  h.M = static_cast<int>(integer(field(j, "M"), "M"));
  h.sample_period_s = number(field(j, "sample_period_s"), "sample_period_s");
  h.carrier_hz = number(field(j, "carrier_hz"), "carrier_hz");
  h.record_count = integer(field(j, "record_count"), "record_count");
  const auto& kind = field(j, "kind");
  if (kind == "snapshot") {
    h.kind = TraceKind::snapshot;
  } else if (kind == "signature") {
    h.kind = TraceKind::signature;
    const auto& sk = field(j, "signature_kind");
    if (sk == "ctls") h.signature_kind = SignatureKind::complex;
    else if (sk == "tls") h.signature_kind = SignatureKind::magnitude;
    else fail(Errc::parse_error, "unknown signature_kind");
  } else {
    fail(Errc::parse_error, "unknown trace kind");
  }
  if (h.k1 < 1 || h.k2 < 1 || h.M < 1 || h.record_count < 0)
    fail(Errc::parse_error, "header dimensions must be positive");
  return h;
}

TraceRecord parse_record(const json& j, const TraceHeader& h) {
  if (!j.is_object()) fail(Errc::parse_error, "record is not an object");
  TraceRecord r;
  r.n = integer(field(j, "n"), "n");
  r.t = number(field(j, "t"), "t");
  const auto& pos = field(j, "pos");
  if (!pos.is_array() || pos.size() != 2) fail(Errc::parse_error, "pos must be [x, y]");
  r.pos = {number(pos[0], "pos.x"), number(pos[1], "pos.y")};
  const auto& hh = field(j, "h");
  auto shape_fail = [&] {
    fail(Errc::dimension_mismatch, "record " + std::to_string(r.n) + " does not match the header's " +
                                       std::to_string(h.k1) + "x" + std::to_string(h.k2) + "x" + std::to_string(h.M) +
                                       " shape");
  };
  if (!hh.is_array()) fail(Errc::parse_error, "h must be an array");
  if (hh.size() != static_cast<std::size_t>(h.k1)) shape_fail();
  for (const auto& row : hh) {
    if (!row.is_array()) fail(Errc::parse_error, "h rows must be arrays");
    if (row.size() != static_cast<std::size_t>(h.k2)) shape_fail();
    for (const auto& taps : row) {
      if (!taps.is_array()) fail(Errc::parse_error, "h entries must be arrays");
      if (taps.size() != static_cast<std::size_t>(h.M)) shape_fail();
      CVec v;
      v.reserve(taps.size());
      for (const auto& c : taps) {
        if (!c.is_array() || c.size() != 2) fail(Errc::parse_error, "taps must be [re, im] pairs");
        v.emplace_back(number(c[0], "re"), number(c[1], "im"));
      }
      r.h.push_back(std::move(v));
    }
  }
  return r;
}

}  // namespace

TraceFile read_trace(std::istream& in, const std::string& source) {
  TraceFile trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        trace.header = parse_header(j);
        have_header = true;
      } else {
        trace.records.push_back(parse_record(j, trace.header));
      }
    } catch (const json::exception& e) {
      file_fail(Errc::parse_error, source, lineno, e.what());
    } catch (const FileError&) {
      throw;
    } catch (const Error& e) {
      throw FileError(e.code(), source, lineno, source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) file_fail(Errc::parse_error, source, lineno == 0 ? 1 : lineno, "missing header");
  if (static_cast<std::int64_t>(trace.records.size()) != trace.header.record_count)
    file_fail(Errc::parse_error, source, lineno,
              "header declares " + std::to_string(trace.header.record_count) + " records, found " +
                  std::to_string(trace.records.size()));
  return trace;
}

TraceFile read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(Errc::io_error, path, 0, "io-error: cannot open " + path);
  return read_trace(in, path);
}

TraceFile trace_from_snapshots(const std::vector<ChannelSnapshot>& snapshots, double carrier_hz,
                               double probe_interval_s) {
  require(!snapshots.empty(), Errc::invalid_argument, "no snapshots to write");
  TraceFile f;
  const auto& first = snapshots.front();
  f.header = {1, first.k1, first.k2, first.M, first.sample_period_s, carrier_hz,
              static_cast<std::int64_t>(snapshots.size()), TraceKind::snapshot, std::nullopt};
  for (const auto& s : snapshots) {
    s.validate();
    require(s.k1 == first.k1 && s.k2 == first.k2 && s.M == first.M, Errc::dimension_mismatch,
            "snapshots differ in shape");
    f.records.push_back({s.meas_index, static_cast<double>(s.meas_index) * probe_interval_s, s.position_m, s.taps});
  }
  return f;
}

std::vector<ChannelSnapshot> snapshots_from_trace(const TraceFile& trace) {
  require(trace.header.kind == TraceKind::snapshot, Errc::invalid_argument, "trace holds signatures, not snapshots");
  std::vector<ChannelSnapshot> out;
  for (const auto& r : trace.records) {
    check_shape(trace.header, r);
    ChannelSnapshot s;
    s.k1 = trace.header.k1;
    s.k2 = trace.header.k2;
    s.M = trace.header.M;
    s.sample_period_s = trace.header.sample_period_s;
    s.meas_index = r.n;
    s.position_m = r.pos;
    s.taps = r.h;
    out.push_back(std::move(s));
  }
  return out;
}

TraceFile trace_from_signatures(const std::vector<LinkSignature>& signatures, double sample_period_s,
                                double carrier_hz, double probe_interval_s) {
  require(!signatures.empty(), Errc::invalid_argument, "no signatures to write");
  const auto& first = signatures.front();
  TraceFile f;
  f.header = {1, first.k1, first.k2, first.M, sample_period_s, carrier_hz,
              static_cast<std::int64_t>(signatures.size()), TraceKind::signature, first.kind};
  for (const auto& s : signatures) {
    require(s.compatible_with(first), Errc::dimension_mismatch, "signatures differ in kind or shape");
    TraceRecord r{s.meas_index, static_cast<double>(s.meas_index) * probe_interval_s, Vec2{}, {}};
    for (int p = 0; p < s.k1 * s.k2; ++p) {
      const auto begin = s.values.begin() + static_cast<std::ptrdiff_t>(p) * s.M;
      r.h.emplace_back(begin, begin + s.M);
    }
    f.records.push_back(std::move(r));
  }
  return f;
}

std::vector<LinkSignature> signatures_from_trace(const TraceFile& trace, SignatureKind kind) {
  std::vector<LinkSignature> out;
  if (trace.header.kind == TraceKind::snapshot) {
    for (const auto& s : snapshots_from_trace(trace)) {
      auto sig = ctls_from_snapshot(s, s.k1, s.k2);
      out.push_back(kind == SignatureKind::complex ? std::move(sig) : tls_from_ctls(sig));
    }
    return out;
  }
  require(trace.header.signature_kind == kind, Errc::invalid_argument,
          std::string("trace holds ") + std::string(to_string(*trace.header.signature_kind)) + " signatures, not " +
              std::string(to_string(kind)));
  for (const auto& r : trace.records) {
    check_shape(trace.header, r);
    LinkSignature sig{kind, trace.header.k1, trace.header.k2, trace.header.M, r.n, {}};
    for (const auto& pair : r.h) sig.values.insert(sig.values.end(), pair.begin(), pair.end());
    out.push_back(std::move(sig));
  }
  return out;
}

}  // namespace locdist
