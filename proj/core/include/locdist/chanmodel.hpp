#pragma once

// Synthetic MIMO multipath channels: plane-wave ray sets over planar antenna
// arrays, sampled as band-limited impulse responses at receiver positions.

#include <cstdint>
#include <span>
#include <vector>

#include "locdist/types.hpp"

namespace locdist {

enum class ArrayKind { uniform_circular, uniform_linear };

struct ArrayGeometry {
  ArrayKind kind = ArrayKind::uniform_circular;
  int element_count = 1;
  double spacing_wavelengths = 0.5;

  void validate() const;
  /// Element coordinates in wavelengths, centred on the array origin.
  std::vector<Vec2> element_positions() const;
};

struct Path {
  double delay_s = 0.0;
  cplx gain{1.0, 0.0};
  double aod_rad = 0.0;
  double aoa_rad = 0.0;
};

struct MultipathChannel {
  double carrier_hz = 2.55e9;
  std::vector<Path> paths;
  ArrayGeometry tx_array;
  ArrayGeometry rx_array;

  void validate() const;
  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
};

struct Trajectory {
  Vec2 start_m;
  Vec2 velocity_mps;
  double probe_interval_s = 3.2e-3;
  int count = 1;

  void validate() const;
  Vec2 position(int n) const { return start_m + (static_cast<double>(n) * probe_interval_s) * velocity_mps; }
};

/// Frequencies at which a band-limited response is sampled: bin k sits at
/// (k + first_bin_offset) * bandwidth_hz / bins relative to the carrier.
/// The default half-bin offset matches the multitone probe's (i + 0.5) MHz
/// tones; OFDM uses offset -bins/2 so bin k is subcarrier k - bins/2.
struct FrequencyGrid {
  double bandwidth_hz = 40e6;
  int bins = 40;
  double first_bin_offset = 0.5;
  std::vector<int> null_bins;

  void validate() const;
  double spacing_hz() const { return bandwidth_hz / bins; }
  double frequency_hz(int k) const { return (k + first_bin_offset) * spacing_hz(); }
  std::vector<double> frequencies_hz() const;
  double sample_period_s() const { return 1.0 / bandwidth_hz; }
};

/// k1 x k2 grid of M-tap impulse responses. taps[i * k2 + j] holds tx antenna
/// i to rx antenna j (0-based, row-major).
struct ChannelSnapshot {
  int k1 = 0;
  int k2 = 0;
  int M = 0;
  double sample_period_s = 0.0;
  std::int64_t meas_index = 0;
  Vec2 position_m;
  std::vector<CVec> taps;

  void validate() const;
  const CVec& pair(int i, int j) const { return taps[static_cast<std::size_t>(i * k2 + j)]; }
  CVec& pair(int i, int j) { return taps[static_cast<std::size_t>(i * k2 + j)]; }
  double power() const;
  friend bool operator==(const ChannelSnapshot&, const ChannelSnapshot&) = default;
};

/// Exponential power-delay profile (mean delay_spread_s), complex Gaussian
/// gains normalized to unit total power, AoA/AoD i.i.d. uniform on [0, 2pi).
MultipathChannel make_random_channel(std::uint64_t seed, int path_count, double delay_spread_s, double carrier_hz,
                                     const ArrayGeometry& tx_array, const ArrayGeometry& rx_array);

/// Continuous response H_ij(f) of every antenna pair at the given baseband
/// frequencies, with the receive array displaced by rx_displacement_m.
/// Result is indexed like ChannelSnapshot::taps.
std::vector<CVec> frequency_response(const MultipathChannel& channel, Vec2 rx_displacement_m,
                                     std::span<const double> freqs_hz);

ChannelSnapshot snapshot_at(const MultipathChannel& channel, Vec2 rx_displacement_m, const FrequencyGrid& grid,
                            std::int64_t meas_index = 0);

/// M bins spanning bandwidth_hz on the default half-bin-offset grid.
ChannelSnapshot snapshot_at(const MultipathChannel& channel, Vec2 rx_displacement_m, double bandwidth_hz, int M,
                            std::int64_t meas_index = 0);

std::vector<ChannelSnapshot> walk_snapshots(const MultipathChannel& channel, const Trajectory& trajectory,
                                            double bandwidth_hz, int M);
std::vector<ChannelSnapshot> walk_snapshots(const MultipathChannel& channel, const Trajectory& trajectory,
                                            const FrequencyGrid& grid);

/// Circular complex Gaussian noise per tap; per antenna pair the ratio of
/// signal energy to expected noise energy is 10^(snr_db/10). snr_db = +inf
/// returns the input unchanged.
ChannelSnapshot add_noise(const ChannelSnapshot& snapshot, double snr_db, std::uint64_t seed);

}  // namespace locdist
