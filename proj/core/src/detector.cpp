#include "locdist/detector.hpp"

#include <cmath>
#include <string>

#include "locdist/error.hpp"

namespace locdist {

void DetectorConfig::validate() const {
  require(history_size >= 3, Errc::invalid_config,
          "history size " + std::to_string(history_size) + " is below the floor of 3");
  require(delay >= 1, Errc::invalid_config, "delay must be at least 1, got " + std::to_string(delay));
  require(std::isfinite(threshold) && threshold > 0.0, Errc::invalid_config, "threshold must be positive and finite");
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::alarm: return "alarm";
    case Verdict::no_alarm: return "no_alarm";
    case Verdict::warming: return "warming";
  }
  return "unknown";
}

Detector::Detector(const DetectorConfig& config)
    : config_((config.validate(), config)), history_(static_cast<std::size_t>(config.history_size)) {}

Decision Detector::step(const LinkSignature& sig) {
  if (!delay_buffer_.empty() && !delay_buffer_.front().compatible_with(sig))
    fail(Errc::dimension_mismatch, "signature " + std::to_string(sig.meas_index) + " does not match prior signatures");
  if (!history_.empty() && !history_[0].compatible_with(sig))
    fail(Errc::dimension_mismatch, "signature " + std::to_string(sig.meas_index) + " does not match prior signatures");

  Decision decision;
  decision.meas_index = sig.meas_index;
  if (history_.size() >= 3) {
    const double d = locdist::delta(sig, history_, config_.norm, config_.sigma_mode);
    decision.delta = d;
    decision.verdict = d > config_.threshold ? Verdict::alarm : Verdict::no_alarm;
  }

  delay_buffer_.push_back(sig);
  if (delay_buffer_.size() > static_cast<std::size_t>(config_.delay)) {
    history_.push(std::move(delay_buffer_.front()));
    delay_buffer_.pop_front();
  }
  ++steps_seen_;
  return decision;
}

std::vector<Decision> run_trace(const DetectorConfig& config, std::span<const LinkSignature> sigs) {
  require(!sigs.empty(), Errc::invalid_argument, "run_trace needs at least one signature");
  Detector det(config);
  std::vector<Decision> out;
  out.reserve(sigs.size());
  for (const auto& s : sigs) out.push_back(det.step(s));
  return out;
}

int warmup_steps(const DetectorConfig& config) { return config.delay + 3; }

}  // namespace locdist
