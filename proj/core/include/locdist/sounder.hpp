#pragma once

// Channel sounding chains: a windowed multitone probe with frequency-division
// estimation, and a 64-subcarrier OFDM frame with a periodic preamble, Moose
// carrier recovery and Walsh-Hadamard MIMO training.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "locdist/chanmodel.hpp"
#include "locdist/cir.hpp"
#include "locdist/types.hpp"

namespace locdist {

// ---------------------------------------------------------------------------
// Multitone probe

inline constexpr double kToneSpacingHz = 1e6;

struct MultitoneProbe {
  int B = 39;  ///< highest tone index; tones are (i + 0.5) MHz for i = 0..B
  std::vector<double> tone_hz;
  std::vector<double> phases_rad;
  double window_frac = 0.25;  ///< Gaussian std as a fraction of the burst; <= 0 disables
  double sample_rate_hz = 100e6;
  double duration_s = 4e-6;

  void validate() const;
  std::size_t sample_count() const;
  double window(std::size_t n) const;
  /// Analytic (complex baseband) equivalent: sum_i w(t) e^{j(2 pi f_i t + theta_i)}.
  CVec analytic_waveform() const;
  /// The real cosine sum itself, windowed.
  std::vector<double> real_waveform() const;
};

struct MultitoneBurst {
  MultitoneProbe probe;
  std::vector<double> samples;  ///< real probe, sum_i w(t) cos(2 pi f_i t + theta_i)
  CVec analytic;                ///< analytic equivalent used by the sounding chain
};

/// Phases are drawn uniformly on [0, pi] from `seed`.
MultitoneBurst make_multitone(int B, std::uint64_t seed, double sample_rate_hz, double duration_s, double window_frac);

/// Per-tone ratio of the received spectrum to the probe spectrum, evaluated at
/// the exact tone frequencies. Throws degenerate_probe if any tone of the
/// probe carries (numerically) no energy.
CVec estimate_freq_response(std::span<const cplx> rx_waveform, const MultitoneProbe& probe);

// ---------------------------------------------------------------------------
// OFDM

struct OfdmConfig {
  int n_subcarriers = 64;
  double subcarrier_spacing_hz = 312.5e3;
  double cp_s = 0.8e-6;
  double symbol_s = 4.0e-6;
  std::vector<int> null_indices{-32, -31, 0, 31};
  int n_train_symbols = 4;

  void validate() const;
  double sample_rate_hz() const { return n_subcarriers * subcarrier_spacing_hz; }
  int cp_samples() const;
  int symbol_samples() const;
  bool is_null(int subcarrier) const;
  /// Known unit-modulus training value carried on a subcarrier.
  double pilot(int subcarrier) const;
  /// FFT bin of a signed subcarrier index.
  int fft_bin(int subcarrier) const;
  /// Null subcarriers as indices k = s + n_subcarriers/2 of a FrequencyGrid.
  std::vector<int> null_grid_bins() const;
};

struct PreambleConfig {
  double short_period_s = 0.8e-6;
  double short_total_s = 8.0e-6;
  double long_period_s = 3.2e-6;
  double long_total_s = 8.0e-6;
  double sync_threshold = 0.5;

  void validate(double sample_rate_hz) const;
  int short_period(double fs) const;
  int short_total(double fs) const;
  int long_period(double fs) const;
  int long_total(double fs) const;
};

/// Reference preamble (short periodic field followed by long periodic field),
/// unit mean power. Both fields are built from pseudo-random spectra on the
/// OFDM subcarrier grid with null subcarriers left empty.
CVec make_preamble(const PreambleConfig& preamble, const OfdmConfig& ofdm);

using WalshMatrix = std::vector<std::vector<int>>;

/// First k1 rows of the Sylvester Walsh-Hadamard matrix of order n_symbols.
WalshMatrix make_walsh_training(int k1, int n_symbols);

/// Carrier offset from the phase of the lag-P autocorrelation of a periodic
/// signal; unambiguous within +-fs/(2P).
double moose_cfo_estimate(std::span<const cplx> rx_long_preamble, int period_samples, double sample_rate_hz);

/// Index of the first preamble sample. Coarse timing from the normalized
/// short-period autocorrelation, refined to the sample where the long field is
/// exactly periodic. Throws sync_failure if either metric peaks below the
/// configured threshold.
std::size_t frame_sync(std::span<const cplx> rx, const PreambleConfig& preamble, double sample_rate_hz);

/// Time-domain training waveform per transmit antenna (cyclic prefixes
/// included): antenna i sends training[i][t] * pilot(s) on every used
/// subcarrier s of symbol t.
std::vector<CVec> ofdm_training_waveform(const WalshMatrix& training, const OfdmConfig& cfg);

struct SubcarrierEstimate {
  int subcarrier = 0;
  std::vector<cplx> h;  ///< k2 x k1 row-major, h[j * k1 + i] = tx i -> rx j
};

struct OfdmChannelEstimate {
  int k1 = 0;
  int k2 = 0;
  std::vector<SubcarrierEstimate> entries;  ///< non-null subcarriers, ascending

  const SubcarrierEstimate* find(int subcarrier) const;
  cplx at(int subcarrier, int rx, int tx) const;
};

/// Per-subcarrier least-squares inversion of orthogonal training,
/// H(s) = Y(s) W^T / n_symbols, for frame-synced, CFO-corrected input.
OfdmChannelEstimate estimate_mimo_ofdm_channel(std::span<const CVec> rx_training, const WalshMatrix& training,
                                               const OfdmConfig& cfg);

// ---------------------------------------------------------------------------
// End-to-end sounding

enum class SoundingMethod { multitone, ofdm };

struct SoundingConfig {
  SoundingMethod method = SoundingMethod::multitone;
  double snr_db = std::numeric_limits<double>::infinity();
  /// Receiver timing error in taps of the estimated impulse response.
  double sync_jitter_samples = 0.0;

  int tones_B = 39;
  std::uint64_t probe_seed = 1;
  double sample_rate_hz = 100e6;
  double duration_s = 4e-6;
  double window_frac = 0.25;

  OfdmConfig ofdm;
  PreambleConfig preamble;
  double cfo_hz = 0.0;
  int guard_samples = 32;  ///< idle samples before and after the OFDM frame
};

/// Grid the chain estimates on; snapshot_at on this grid is the ground truth.
FrequencyGrid sounding_grid(const SoundingConfig& cfg);

struct SoundedResponse {
  FrequencyGrid grid;
  int k1 = 0;
  int k2 = 0;
  std::vector<CVec> bins;  ///< per antenna pair (row-major), one value per grid bin
};

SoundedResponse sound_frequency_response(const MultipathChannel& channel, Vec2 rx_displacement_m,
                                         const SoundingConfig& cfg, std::uint64_t seed);

/// Impulse response over the first `bins` grid bins of a sounded response
/// (a narrower signature bandwidth); bins = 0 uses all of them.
ChannelSnapshot to_snapshot(const SoundedResponse& response, std::int64_t meas_index, Vec2 position_m, int bins = 0);

ChannelSnapshot sound_snapshot(const MultipathChannel& channel, Vec2 rx_displacement_m, const SoundingConfig& cfg,
                               std::int64_t meas_index, std::uint64_t seed);

ChannelSnapshot truth_snapshot(const MultipathChannel& channel, Vec2 rx_displacement_m, const SoundingConfig& cfg,
                               std::int64_t meas_index = 0);

}  // namespace locdist
