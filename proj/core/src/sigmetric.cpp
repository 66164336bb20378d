#include "locdist/sigmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "locdist/error.hpp"

namespace locdist {

std::string_view to_string(SignatureKind kind) noexcept { return kind == SignatureKind::complex ? "ctls" : "tls"; }
std::string_view to_string(NormKind norm) noexcept { return norm == NormKind::l2 ? "l2" : "phi2"; }
std::string_view to_string(SigmaMode mode) noexcept {
  return mode == SigmaMode::paper ? "paper" : "mean-pairwise";
}

bool LinkSignature::compatible_with(const LinkSignature& other) const {
  return kind == other.kind && k1 == other.k1 && k2 == other.k2 && M == other.M &&
         values.size() == other.values.size();
}

double LinkSignature::norm_squared() const {
  double s = 0.0;
  for (auto v : values) s += std::norm(v);
  return s;
}

LinkSignature ctls_from_snapshot(const ChannelSnapshot& snapshot, int k1_sub, int k2_sub) {
  snapshot.validate();
  require(k1_sub >= 1 && k2_sub >= 1 && k1_sub <= snapshot.k1 && k2_sub <= snapshot.k2, Errc::invalid_argument,
          "antenna subset " + std::to_string(k1_sub) + "x" + std::to_string(k2_sub) + " exceeds snapshot " +
              std::to_string(snapshot.k1) + "x" + std::to_string(snapshot.k2));
  LinkSignature sig;
  sig.kind = SignatureKind::complex;
  sig.k1 = k1_sub;
  sig.k2 = k2_sub;
  sig.M = snapshot.M;
  sig.meas_index = snapshot.meas_index;
  sig.values.reserve(static_cast<std::size_t>(k1_sub * k2_sub * snapshot.M));
  for (int i = 0; i < k1_sub; ++i)
    for (int j = 0; j < k2_sub; ++j) {
      const auto& taps = snapshot.pair(i, j);
      sig.values.insert(sig.values.end(), taps.begin(), taps.end());
    }
  return sig;
}

LinkSignature tls_from_ctls(const LinkSignature& ctls) {
  require(ctls.kind == SignatureKind::complex, Errc::invalid_argument, "TLS must be built from a complex signature");
  LinkSignature out = ctls;
  out.kind = SignatureKind::magnitude;
  for (auto& v : out.values) v = std::abs(v);
  return out;
}

namespace {

void check_pair(const LinkSignature& a, const LinkSignature& b) {
  if (!a.compatible_with(b))
    fail(Errc::dimension_mismatch, "signatures differ in kind or shape (" + std::to_string(a.values.size()) + " vs " +
                                       std::to_string(b.values.size()) + " values)");
}

}  // namespace

double l2_dist(const LinkSignature& a, const LinkSignature& b) {
  check_pair(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s);
}

double phi2_dist(const LinkSignature& a, const LinkSignature& b) {
  check_pair(a, b);
  require(a.kind == SignatureKind::complex, Errc::invalid_argument, "phi2 distance needs complex signatures");
  cplx inner{};
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    inner += std::conj(a.values[i]) * b.values[i];
  }
  // Evaluating the residual at the optimal rotation avoids the cancellation
  // of the closed form when the signatures nearly coincide. Splitting the
  // rotation as h a - conj(h) b keeps the result exactly symmetric.
  const cplx h = std::polar(1.0, 0.5 * std::arg(inner));
  double r = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) r += std::norm(h * a.values[i] - std::conj(h) * b.values[i]);
  return std::sqrt(r);
}

double distance(const LinkSignature& a, const LinkSignature& b, NormKind norm) {
  return norm == NormKind::l2 ? l2_dist(a, b) : phi2_dist(a, b);
}

SignatureHistory::SignatureHistory(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, Errc::invalid_argument, "history capacity must be positive");
}

void SignatureHistory::push(LinkSignature sig) {
  if (!entries_.empty() && !entries_.front().compatible_with(sig))
    fail(Errc::dimension_mismatch, "signature does not match the history's kind or shape");
  entries_.push_back(std::move(sig));
  if (entries_.size() > capacity_) entries_.pop_front();
}

double sigma(const SignatureHistory& history, NormKind norm, SigmaMode mode) {
  const std::size_t n = history.size();
  require(n >= 3, Errc::insufficient_history,
          "sigma needs at least 3 history entries, have " + std::to_string(n));
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) sum += distance(history[a], history[b], norm);
  const double nn = static_cast<double>(n);
  return mode == SigmaMode::paper ? sum / ((nn - 1.0) * (nn - 2.0)) : 2.0 * sum / (nn * (nn - 1.0));
}

double delta(const LinkSignature& current, const SignatureHistory& history, NormKind norm, SigmaMode mode) {
  const double s = sigma(history, norm, mode);
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& entry : history) closest = std::min(closest, distance(entry, current, norm));
  if (s < 1e-12) return closest < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  return closest / s;
}

}  // namespace locdist
