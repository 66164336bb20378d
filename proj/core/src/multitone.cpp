#include <algorithm>
#include <cmath>
#include <string>

#include "locdist/error.hpp"
#include "locdist/random.hpp"
#include "locdist/sounder.hpp"

namespace locdist {

void MultitoneProbe::validate() const {
  require(B >= 0, Errc::invalid_argument, "multitone B must be nonnegative");
  require(tone_hz.size() == static_cast<std::size_t>(B + 1) && phases_rad.size() == tone_hz.size(),
          Errc::invalid_argument, "multitone probe needs B+1 tones and phases");
  require(duration_s > 0.0, Errc::invalid_argument, "probe duration must be positive");
  require(sample_rate_hz > 2.0 * tone_hz.back(), Errc::invalid_argument,
          "sample rate " + std::to_string(sample_rate_hz) + " Hz violates Nyquist for highest tone " +
              std::to_string(tone_hz.back()) + " Hz");
  require(sample_count() >= 2, Errc::invalid_argument, "probe shorter than two samples");
}

std::size_t MultitoneProbe::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

double MultitoneProbe::window(std::size_t n) const {
  if (window_frac <= 0.0) return 1.0;
  const double t = static_cast<double>(n) / sample_rate_hz;
  const double sigma = window_frac * duration_s;
  const double x = (t - duration_s / 2.0) / sigma;
  return std::exp(-0.5 * x * x);
}

CVec MultitoneProbe::analytic_waveform() const {
  const std::size_t n = sample_count();
  CVec x(n, cplx{});
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) / sample_rate_hz;
    cplx acc{};
    for (std::size_t i = 0; i < tone_hz.size(); ++i) acc += std::polar(1.0, 2.0 * kPi * tone_hz[i] * t + phases_rad[i]);
    x[s] = window(s) * acc;
  }
  return x;
}

std::vector<double> MultitoneProbe::real_waveform() const {
  const std::size_t n = sample_count();
  std::vector<double> x(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) / sample_rate_hz;
    double acc = 0.0;
    for (std::size_t i = 0; i < tone_hz.size(); ++i) acc += std::cos(2.0 * kPi * tone_hz[i] * t + phases_rad[i]);
    x[s] = window(s) * acc;
  }
  return x;
}

MultitoneBurst make_multitone(int B, std::uint64_t seed, double sample_rate_hz, double duration_s, double window_frac) {
  require(B >= 0, Errc::invalid_argument, "multitone B must be nonnegative");
  MultitoneBurst burst;
  auto& p = burst.probe;
  p.B = B;
  p.window_frac = window_frac;
  p.sample_rate_hz = sample_rate_hz;
  p.duration_s = duration_s;
  Rng rng(derive_seed(seed, {0x746f6e65ULL}));
  for (int i = 0; i <= B; ++i) {
    p.tone_hz.push_back((i + 0.5) * kToneSpacingHz);
    p.phases_rad.push_back(rng.uniform(0.0, kPi));
  }
  p.validate();
  burst.samples = p.real_waveform();
  burst.analytic = p.analytic_waveform();
  return burst;
}

namespace {

cplx dtft(std::span<const cplx> x, double f_hz, double fs) {
  cplx acc{};
  const double w = -2.0 * kPi * f_hz / fs;
  for (std::size_t n = 0; n < x.size(); ++n) acc += x[n] * std::polar(1.0, w * static_cast<double>(n));
  return acc;
}

}  // namespace

CVec estimate_freq_response(std::span<const cplx> rx_waveform, const MultitoneProbe& probe) {
  probe.validate();
  const CVec tx = probe.analytic_waveform();
  require(rx_waveform.size() == tx.size(), Errc::dimension_mismatch,
          "received burst has " + std::to_string(rx_waveform.size()) + " samples, probe has " +
              std::to_string(tx.size()));

  // A lone unit tone would reach the window sum at its own frequency.
  double nominal = 0.0;
  for (std::size_t s = 0; s < tx.size(); ++s) nominal += probe.window(s);
  CVec tx_bins(probe.tone_hz.size());
  for (std::size_t i = 0; i < tx_bins.size(); ++i) tx_bins[i] = dtft(tx, probe.tone_hz[i], probe.sample_rate_hz);
  CVec h(tx_bins.size());
  for (std::size_t i = 0; i < tx_bins.size(); ++i) {
    if (std::abs(tx_bins[i]) <= 1e-9 * nominal)
      fail(Errc::degenerate_probe, "tone " + std::to_string(i) + " of the probe carries no energy");
    h[i] = dtft(rx_waveform, probe.tone_hz[i], probe.sample_rate_hz) / tx_bins[i];
  }
  return h;
}

}  // namespace locdist
