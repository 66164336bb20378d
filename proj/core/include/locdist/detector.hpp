#pragma once

// Real-time location-distinction state machine: a delay buffer of the D most
// recent signatures feeding a FIFO history of N older ones, with a thresholded
// alarm on the difference metric.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "locdist/sigmetric.hpp"

namespace locdist {

struct DetectorConfig {
  int history_size = 5;
  int delay = 1;
  double threshold = 1.0;
  NormKind norm = NormKind::phi2;
  SigmaMode sigma_mode = SigmaMode::paper;

  /// Throws invalid_config; N below 3 names the floor of 3.
  void validate() const;
};

enum class Verdict { alarm, no_alarm, warming };
std::string_view to_string(Verdict verdict) noexcept;

struct Decision {
  Verdict verdict = Verdict::warming;
  std::optional<double> delta;
  std::int64_t meas_index = 0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

class Detector {
 public:
  explicit Detector(const DetectorConfig& config);

  Decision step(const LinkSignature& sig);

  const DetectorConfig& config() const { return config_; }
  const SignatureHistory& history() const { return history_; }
  const std::deque<LinkSignature>& delay_buffer() const { return delay_buffer_; }
  std::int64_t steps_seen() const { return steps_seen_; }

 private:
  DetectorConfig config_;
  SignatureHistory history_;
  std::deque<LinkSignature> delay_buffer_;
  std::int64_t steps_seen_ = 0;
};

/// Fold of Detector::step over `sigs`; throws invalid_argument on an empty list.
std::vector<Decision> run_trace(const DetectorConfig& config, std::span<const LinkSignature> sigs);

/// Number of leading steps that report `warming` for this configuration.
int warmup_steps(const DetectorConfig& config);

}  // namespace locdist
