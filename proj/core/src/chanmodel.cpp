#include "locdist/chanmodel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "locdist/cir.hpp"
#include "locdist/error.hpp"
#include "locdist/random.hpp"

namespace locdist {

void ArrayGeometry::validate() const {
  require(element_count >= 1, Errc::invalid_argument, "array needs at least one element");
  require(spacing_wavelengths > 0.0, Errc::invalid_argument, "array element spacing must be positive");
}

std::vector<Vec2> ArrayGeometry::element_positions() const {
  validate();
  std::vector<Vec2> pos(static_cast<std::size_t>(element_count));
  const double k = element_count;
  if (kind == ArrayKind::uniform_linear) {
    for (int e = 0; e < element_count; ++e) pos[static_cast<std::size_t>(e)] = {(e - (k - 1.0) / 2.0) * spacing_wavelengths, 0.0};
    return pos;
  }
  if (element_count == 1) return pos;
  // Chord between neighbours equals the nominal spacing.
  const double radius = spacing_wavelengths / (2.0 * std::sin(kPi / k));
  for (int e = 0; e < element_count; ++e) {
    const double a = 2.0 * kPi * e / k;
    pos[static_cast<std::size_t>(e)] = {radius * std::cos(a), radius * std::sin(a)};
  }
  return pos;
}

void MultipathChannel::validate() const {
  require(carrier_hz > 0.0, Errc::invalid_argument, "carrier frequency must be positive");
  require(!paths.empty(), Errc::invalid_argument, "channel has no paths");
  for (const auto& p : paths) {
    require(p.delay_s >= 0.0, Errc::invalid_argument, "path delay must be nonnegative");
    require(std::isfinite(std::abs(p.gain)), Errc::invalid_argument, "path gain must be finite");
  }
  tx_array.validate();
  rx_array.validate();
}

void Trajectory::validate() const {
  require(count >= 1, Errc::invalid_argument, "trajectory needs at least one sample");
  require(probe_interval_s > 0.0, Errc::invalid_argument, "probe interval must be positive");
}

void FrequencyGrid::validate() const {
  require(bins >= 2, Errc::invalid_argument, "need at least 2 frequency bins, got " + std::to_string(bins));
  require(bandwidth_hz > 0.0 && std::isfinite(bandwidth_hz), Errc::invalid_argument, "bandwidth must be positive");
  for (int k : null_bins) require(k >= 0 && k < bins, Errc::invalid_argument, "null bin out of range");
}

std::vector<double> FrequencyGrid::frequencies_hz() const {
  std::vector<double> f(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) f[static_cast<std::size_t>(k)] = frequency_hz(k);
  return f;
}

void ChannelSnapshot::validate() const {
  require(k1 >= 1 && k2 >= 1 && M >= 1, Errc::dimension_mismatch, "snapshot dimensions must be positive");
  require(taps.size() == static_cast<std::size_t>(k1 * k2), Errc::dimension_mismatch,
          "snapshot grid must hold k1*k2 tap vectors");
  for (const auto& t : taps)
    require(t.size() == static_cast<std::size_t>(M), Errc::dimension_mismatch, "every tap vector must have M taps");
}

double ChannelSnapshot::power() const {
  double p = 0.0;
  for (const auto& t : taps)
    for (auto v : t) p += std::norm(v);
  return p;
}

MultipathChannel make_random_channel(std::uint64_t seed, int path_count, double delay_spread_s, double carrier_hz,
                                     const ArrayGeometry& tx_array, const ArrayGeometry& rx_array) {
  require(path_count >= 1, Errc::invalid_argument, "path_count must be at least 1");
  require(delay_spread_s > 0.0, Errc::invalid_argument, "delay spread must be positive");
  require(carrier_hz > 0.0, Errc::invalid_argument, "carrier frequency must be positive");
  tx_array.validate();
  rx_array.validate();

  Rng rng(derive_seed(seed, {0x636861ULL}));
  MultipathChannel ch;
  ch.carrier_hz = carrier_hz;
  ch.tx_array = tx_array;
  ch.rx_array = rx_array;
  ch.paths.resize(static_cast<std::size_t>(path_count));
  double total = 0.0;
  for (auto& p : ch.paths) {
    p.delay_s = rng.exponential(delay_spread_s);
    p.gain = rng.complex_normal(std::exp(-p.delay_s / delay_spread_s));
    p.aoa_rad = rng.uniform(0.0, 2.0 * kPi);
    p.aod_rad = rng.uniform(0.0, 2.0 * kPi);
    total += std::norm(p.gain);
  }
  const double scale = 1.0 / std::sqrt(total);
  for (auto& p : ch.paths) p.gain *= scale;
  return ch;
}

std::vector<CVec> frequency_response(const MultipathChannel& channel, Vec2 rx_displacement_m,
                                     std::span<const double> freqs_hz) {
  channel.validate();
  const auto tx_pos = channel.tx_array.element_positions();
  const auto rx_pos = channel.rx_array.element_positions();
  const std::size_t k1 = tx_pos.size();
  const std::size_t k2 = rx_pos.size();
  const std::size_t nf = freqs_hz.size();
  const double lambda = channel.wavelength_m();

  std::vector<CVec> h(k1 * k2, CVec(nf, cplx{}));
  CVec delay_phase(nf);
  CVec a_tx(k1), a_rx(k2);
  for (const auto& p : channel.paths) {
    const Vec2 u_aoa{std::cos(p.aoa_rad), std::sin(p.aoa_rad)};
    const Vec2 u_aod{std::cos(p.aod_rad), std::sin(p.aod_rad)};
    const cplx weight = p.gain * std::polar(1.0, -2.0 * kPi * dot(u_aoa, rx_displacement_m) / lambda);
    for (std::size_t i = 0; i < k1; ++i) a_tx[i] = std::polar(1.0, -2.0 * kPi * dot(u_aod, tx_pos[i]));
    for (std::size_t j = 0; j < k2; ++j) a_rx[j] = std::polar(1.0, -2.0 * kPi * dot(u_aoa, rx_pos[j]));
    for (std::size_t k = 0; k < nf; ++k) delay_phase[k] = std::polar(1.0, -2.0 * kPi * freqs_hz[k] * p.delay_s);
    for (std::size_t i = 0; i < k1; ++i) {
      for (std::size_t j = 0; j < k2; ++j) {
        const cplx w = weight * a_tx[i] * a_rx[j];
        auto& dst = h[i * k2 + j];
        for (std::size_t k = 0; k < nf; ++k) dst[k] += w * delay_phase[k];
      }
    }
  }
  return h;
}

ChannelSnapshot snapshot_at(const MultipathChannel& channel, Vec2 rx_displacement_m, const FrequencyGrid& grid,
                            std::int64_t meas_index) {
  grid.validate();
  const auto freqs = grid.frequencies_hz();
  auto response = frequency_response(channel, rx_displacement_m, freqs);

  ChannelSnapshot s;
  s.k1 = channel.tx_array.element_count;
  s.k2 = channel.rx_array.element_count;
  s.M = grid.bins;
  s.sample_period_s = grid.sample_period_s();
  s.meas_index = meas_index;
  s.position_m = rx_displacement_m;
  s.taps.reserve(response.size());
  for (const auto& hf : response) s.taps.push_back(freq_to_cir(hf, grid.bins, grid.null_bins));
  return s;
}

ChannelSnapshot snapshot_at(const MultipathChannel& channel, Vec2 rx_displacement_m, double bandwidth_hz, int M,
                            std::int64_t meas_index) {
  require(M >= 2, Errc::invalid_argument, "snapshot needs M >= 2 taps");
  require(bandwidth_hz > 0.0, Errc::invalid_argument, "bandwidth must be positive");
  return snapshot_at(channel, rx_displacement_m, FrequencyGrid{bandwidth_hz, M, 0.5, {}}, meas_index);
}

std::vector<ChannelSnapshot> walk_snapshots(const MultipathChannel& channel, const Trajectory& trajectory,
                                            const FrequencyGrid& grid) {
  trajectory.validate();
  std::vector<ChannelSnapshot> out;
  out.reserve(static_cast<std::size_t>(trajectory.count));
  for (int n = 0; n < trajectory.count; ++n) out.push_back(snapshot_at(channel, trajectory.position(n), grid, n));
  return out;
}

std::vector<ChannelSnapshot> walk_snapshots(const MultipathChannel& channel, const Trajectory& trajectory,
                                            double bandwidth_hz, int M) {
  require(M >= 2, Errc::invalid_argument, "snapshot needs M >= 2 taps");
  require(bandwidth_hz > 0.0, Errc::invalid_argument, "bandwidth must be positive");
  return walk_snapshots(channel, trajectory, FrequencyGrid{bandwidth_hz, M, 0.5, {}});
}

ChannelSnapshot add_noise(const ChannelSnapshot& snapshot, double snr_db, std::uint64_t seed) {
  snapshot.validate();
  if (snr_db == std::numeric_limits<double>::infinity()) return snapshot;
  require(!std::isnan(snr_db), Errc::invalid_argument, "snr_db is NaN");
  require(snapshot.power() > 0.0, Errc::invalid_argument, "cannot set a finite SNR on a zero-power snapshot");

  const double snr = std::pow(10.0, snr_db / 10.0);
  ChannelSnapshot out = snapshot;
  Rng rng(derive_seed(seed, {0x6e6f6973ULL}));
  for (auto& pair : out.taps) {
    double p = 0.0;
    for (auto v : pair) p += std::norm(v);
    const double variance = p / (snr * static_cast<double>(pair.size()));
    for (auto& v : pair) v += rng.complex_normal(variance);
  }
  return out;
}

}  // namespace locdist
