#pragma once

// Hypothesis-test evaluation: empirical difference-metric populations under
// "not moved" (H0) and "moved" (H1), ROC curves, miss rate at a false-alarm
// target, parameter sweeps over synthetic scenarios and the inverse power-law
// fit of miss rate against antenna-pair count.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locdist/chanmodel.hpp"
#include "locdist/detector.hpp"
#include "locdist/sigmetric.hpp"
#include "locdist/sounder.hpp"

namespace locdist {

enum class Hypothesis { h0, h1 };

struct DeltaSample {
  Hypothesis hypothesis = Hypothesis::h0;
  double delta = 0.0;
  std::string config_tag;
};

/// A signature trace. For a relocation ("jump") trace, move_index is the
/// position of the first signature taken at the new location.
struct SignatureTrace {
  std::vector<LinkSignature> signatures;
  std::optional<std::size_t> move_index;
};

/// Post-warm-up deltas of every H0 trace, and of every H1 trace; an H1 trace
/// with a move_index contributes only the delta at that index.
std::vector<DeltaSample> collect_deltas(std::span<const SignatureTrace> h0_traces,
                                        std::span<const SignatureTrace> h1_traces, const DetectorConfig& config,
                                        const std::string& config_tag = {});

struct RocPoint {
  double gamma = 0.0;
  double pfa = 0.0;
  double pd = 0.0;
  double pm = 0.0;
};

/// Empirical ROC, ascending in gamma from -inf to +inf. An alarm is delta > gamma.
std::vector<RocPoint> roc(std::span<const DeltaSample> samples);

/// Smallest miss rate among points whose pfa does not exceed the target.
double pm_at_pfa(std::span<const RocPoint> points, double target_pfa);

/// Miss rate clipped at the 1/T resolution of T scored H1 samples.
struct MissRate {
  double pm = 0.0;
  bool at_floor = false;
};
MissRate measurable_pm(double pm, std::size_t h1_count);

struct PowerLawFit {
  double b = 0.0;
  double m = 0.0;
  double residual = 0.0;  ///< RMS of log10 residuals
};

/// Least squares of log10(pm) against log10(k1*k2); pm = b / (k1*k2)^m.
PowerLawFit fit_power_law(std::span<const std::pair<int, double>> points);

// ---------------------------------------------------------------------------
// Synthetic scenarios

/// Recipe for drawing random channels.
struct ChannelSpec {
  int path_count = 64;
  double delay_spread_s = 100e-9;
  double carrier_hz = 2.55e9;
  ArrayGeometry tx_array{ArrayKind::uniform_circular, 1, 0.5};
  ArrayGeometry rx_array{ArrayKind::uniform_circular, 1, 0.5};

  MultipathChannel draw(std::uint64_t seed) const;
};

enum class UseCase {
  jump,    ///< long stationary segment, then one measurement at a new location
  moving,  ///< continuously moving transmitter; every decision is an H1 sample
};

struct Scenario {
  ChannelSpec channel;
  int antennas_tx = 1;
  int antennas_rx = 1;
  int tones = 40;  ///< signature bandwidth in 1 MHz tones
  double snr_db = 25.0;
  SignatureKind kind = SignatureKind::complex;
  /// Common random carrier phase per measurement (no phase synchronization).
  bool random_phase = true;

  /// Fraction of received power carried by time-varying scatterers, and the
  /// per-measurement correlation of their gains.
  double dynamic_power_fraction = 0.35;
  int dynamic_path_count = 32;
  double dynamic_correlation = 0.5;

  DetectorConfig detector{5, 1, 1.0, NormKind::phi2, SigmaMode::paper};
  UseCase use_case = UseCase::jump;
  int trials = 500;
  int h0_decisions_per_trial = 10;  ///< scored decisions per stationary trace
  double jump_min_wavelengths = 1.0;
  double jump_max_wavelengths = 20.0;
  double speed_mps = 0.3175;
  double probe_interval_s = 3.2e-3;
  int moving_decisions_per_trial = 4;
  double target_pfa = 1e-2;

  void validate() const;
  FrequencyGrid grid() const;
};

/// Standard jump scenario: 25 dB SNR, N = 5, D = 1, CTLS with phi2 and no
/// phase synchronization.
Scenario standard_scenario();
/// Same channel statistics with a synchronized carrier phase.
Scenario phase_synchronous_scenario();

struct ScenarioTraces {
  std::vector<SignatureTrace> h0;
  std::vector<SignatureTrace> h1;
};

ScenarioTraces generate_traces(const Scenario& scenario, std::uint64_t seed);

struct ScenarioResult {
  std::vector<DeltaSample> samples;
  std::vector<RocPoint> roc;
  std::size_t h0_count = 0;
  std::size_t h1_count = 0;
  MissRate pm;  ///< at scenario.target_pfa
};

ScenarioResult evaluate_scenario(const Scenario& scenario, std::uint64_t seed, const std::string& tag = {});

enum class SweepKind { history, delay, antennas, bandwidth, signature };

/// Grid values are numbers for every kind except signature, whose values are
/// "ctls-l2", "ctls-phi2" or "tls-l2". Antenna values are k1*k2 for square
/// arrays; bandwidth values are in MHz and map to MHz/2 tones.
struct SweepRow {
  std::string value;
  double target_pfa = 0.0;
  MissRate pm;
  std::vector<RocPoint> roc;
  std::size_t h1_count = 0;
};

std::vector<SweepRow> sweep(SweepKind kind, std::span<const std::string> grid, const Scenario& base,
                            std::uint64_t seed);

/// Scenario with one sweep value applied; throws invalid_grid for values the
/// scenario cannot realise.
Scenario apply_sweep_value(const Scenario& base, SweepKind kind, const std::string& value);

/// Monte-Carlo mean distance between signatures at displacement 0 and d along
/// x, each trial on a freshly drawn channel. Noiseless and phase-coherent.
std::vector<std::pair<double, double>> avg_distance_vs_separation(const ChannelSpec& channel,
                                                                  const FrequencyGrid& grid,
                                                                  std::span<const double> separations_m,
                                                                  NormKind norm, int trials, std::uint64_t seed);

/// Mean phi2 distance between consecutive sounded 1x1 signatures of a static
/// channel with timing jitter, divided by the same mean without jitter.
struct JitterInflation {
  int tones = 0;
  double mean_with_jitter = 0.0;
  double mean_without_jitter = 0.0;
  double ratio = 0.0;
};

std::vector<JitterInflation> jitter_inflation(const ChannelSpec& channel, const SoundingConfig& sounding,
                                              double jitter_std_taps, std::span<const int> tone_counts,
                                              int trials, int measurements, std::uint64_t seed);

/// Runs body(i) for i in [0, count) on a pool of worker threads. Each index is
/// visited exactly once; exceptions are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

std::string_view to_string(SweepKind kind) noexcept;
std::string_view to_string(Hypothesis h) noexcept;

}  // namespace locdist
