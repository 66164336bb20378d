#pragma once

// Link-signature algebra: complex (CTLS) and magnitude (TLS) temporal
// signatures concatenated over antenna pairs, the l2 and phase-invariant phi2
// distances, and the history-normalized difference metric.

#include <cstdint>
#include <deque>
#include <string_view>

#include "locdist/chanmodel.hpp"
#include "locdist/types.hpp"

namespace locdist {

enum class SignatureKind { complex, magnitude };
enum class NormKind { l2, phi2 };
enum class SigmaMode { paper, mean_pairwise };

std::string_view to_string(SignatureKind kind) noexcept;
std::string_view to_string(NormKind norm) noexcept;
std::string_view to_string(SigmaMode mode) noexcept;

/// Concatenated per-pair impulse responses, pairs in row-major order over
/// (tx, rx). Magnitude signatures keep a zero imaginary part.
struct LinkSignature {
  SignatureKind kind = SignatureKind::complex;
  int k1 = 1;
  int k2 = 1;
  int M = 1;
  std::int64_t meas_index = 0;
  CVec values;

  bool compatible_with(const LinkSignature& other) const;
  double norm_squared() const;
};

/// Signature of the first k1_sub x k2_sub antennas of a snapshot.
LinkSignature ctls_from_snapshot(const ChannelSnapshot& snapshot, int k1_sub, int k2_sub);
LinkSignature tls_from_ctls(const LinkSignature& ctls);

double l2_dist(const LinkSignature& a, const LinkSignature& b);

/// min over phi of ||a - b e^{j phi}||, in closed form
/// sqrt(max(0, ||a||^2 + ||b||^2 - 2 |<a, b>|)).
double phi2_dist(const LinkSignature& a, const LinkSignature& b);

double distance(const LinkSignature& a, const LinkSignature& b, NormKind norm);

/// FIFO of at most `capacity` signatures; pushing past capacity drops the oldest.
class SignatureHistory {
 public:
  explicit SignatureHistory(std::size_t capacity);

  void push(LinkSignature sig);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const LinkSignature& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::deque<LinkSignature> entries_;
};

/// Sum of distances over unordered distinct pairs of history entries, scaled
/// by 1/((N-1)(N-2)) (SigmaMode::paper) or 2/(N(N-1)) (mean_pairwise).
/// Needs at least three entries.
double sigma(const SignatureHistory& history, NormKind norm, SigmaMode mode = SigmaMode::paper);

/// Minimum distance from `current` to the history divided by sigma. A
/// degenerate history (sigma < 1e-12) yields 0 when current matches an entry
/// to within 1e-12 and +inf otherwise.
double delta(const LinkSignature& current, const SignatureHistory& history, NormKind norm,
             SigmaMode mode = SigmaMode::paper);

}  // namespace locdist
