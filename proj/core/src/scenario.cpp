#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "locdist/error.hpp"
#include "locdist/evalharness.hpp"
#include "locdist/random.hpp"

namespace locdist {

std::string_view to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::history: return "history";
    case SweepKind::delay: return "delay";
    case SweepKind::antennas: return "antennas";
    case SweepKind::bandwidth: return "bandwidth";
    case SweepKind::signature: return "signature";
  }
  return "unknown";
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

MultipathChannel ChannelSpec::draw(std::uint64_t seed) const {
  return make_random_channel(seed, path_count, delay_spread_s, carrier_hz, tx_array, rx_array);
}

void Scenario::validate() const {
  detector.validate();
  require(antennas_tx >= 1 && antennas_rx >= 1, Errc::invalid_config, "antenna counts must be positive");
  require(antennas_tx <= channel.tx_array.element_count && antennas_rx <= channel.rx_array.element_count,
          Errc::invalid_config,
          "antenna counts exceed the available arrays (" + std::to_string(channel.tx_array.element_count) + "x" +
              std::to_string(channel.rx_array.element_count) + ")");
  require(tones >= 2, Errc::invalid_config, "signature needs at least 2 tones");
  require(!std::isnan(snr_db), Errc::invalid_config, "snr_db is NaN");
  require(dynamic_power_fraction >= 0.0 && dynamic_power_fraction < 1.0, Errc::invalid_config,
          "dynamic power fraction must lie in [0, 1)");
  require(dynamic_path_count >= 1, Errc::invalid_config, "dynamic path count must be positive");
  require(dynamic_correlation >= 0.0 && dynamic_correlation <= 1.0, Errc::invalid_config,
          "dynamic correlation must lie in [0, 1]");
  require(trials >= 1, Errc::invalid_config, "trials must be positive");
  require(h0_decisions_per_trial >= 1 && moving_decisions_per_trial >= 1, Errc::invalid_config,
          "decisions per trial must be positive");
  require(jump_min_wavelengths >= 0.0 && jump_max_wavelengths >= jump_min_wavelengths, Errc::invalid_config,
          "jump distance range is empty");
  require(probe_interval_s > 0.0, Errc::invalid_config, "probe interval must be positive");
  require(target_pfa >= 0.0 && target_pfa <= 1.0, Errc::invalid_config, "target false-alarm rate outside [0, 1]");
  if (kind == SignatureKind::magnitude)
    require(detector.norm == NormKind::l2, Errc::invalid_config, "magnitude signatures use the l2 norm");
}

FrequencyGrid Scenario::grid() const { return FrequencyGrid{tones * kToneSpacingHz, tones, 0.5, {}}; }

Scenario standard_scenario() {
  Scenario s;
  s.channel.tx_array = {ArrayKind::uniform_circular, 8, 0.5};
  s.channel.rx_array = {ArrayKind::uniform_circular, 8, 0.5};
  return s;
}

Scenario phase_synchronous_scenario() {
  Scenario s = standard_scenario();
  s.random_phase = false;
  s.detector.norm = NormKind::l2;
  return s;
}

namespace {

// One transmitter-receiver link: a fixed multipath geometry plus a set of
// scatterers whose gains wander from one measurement to the next.
class LinkSimulator {
 public:
  LinkSimulator(const Scenario& sc, std::uint64_t seed) : sc_(sc), grid_(sc.grid()), seed_(seed) {
    ChannelSpec spec = sc.channel;
    spec.tx_array.element_count = sc.antennas_tx;
    spec.rx_array.element_count = sc.antennas_rx;
    static_ = spec.draw(derive_seed(seed, {1}));
    ChannelSpec dyn_spec = spec;
    dyn_spec.path_count = sc.dynamic_path_count;
    dynamic_ = dyn_spec.draw(derive_seed(seed, {2}));
    const double ks = std::sqrt(1.0 - sc.dynamic_power_fraction);
    const double kd = std::sqrt(sc.dynamic_power_fraction);
    for (auto& p : static_.paths) p.gain *= ks;
    for (auto& p : dynamic_.paths) {
      p.gain *= kd;
      path_power_.push_back(std::norm(p.gain));
    }
  }

  // Generates a trace at the given positions. `stream` separates the random
  // draws of different traces on the same link.
  std::vector<LinkSignature> trace(const std::vector<Vec2>& positions, std::uint64_t stream) {
    Rng rng(derive_seed(seed_, {3, stream}));
    MultipathChannel dyn = dynamic_;
    const double a = sc_.dynamic_correlation;
    const double innovation = 1.0 - a * a;
    for (std::size_t l = 0; l < dyn.paths.size(); ++l) dyn.paths[l].gain = rng.complex_normal(path_power_[l]);

    std::vector<LinkSignature> out;
    out.reserve(positions.size());
    const ChannelSnapshot* cached = nullptr;
    ChannelSnapshot static_snap;
    Vec2 cached_pos{};
    for (std::size_t n = 0; n < positions.size(); ++n) {
      if (n > 0)
        for (std::size_t l = 0; l < dyn.paths.size(); ++l)
          dyn.paths[l].gain = a * dyn.paths[l].gain + rng.complex_normal(innovation * path_power_[l]);
      if (cached == nullptr || !(positions[n] == cached_pos)) {
        static_snap = snapshot_at(static_, positions[n], grid_, 0);
        cached = &static_snap;
        cached_pos = positions[n];
      }
      ChannelSnapshot snap = snapshot_at(dyn, positions[n], grid_, static_cast<std::int64_t>(n));
      for (std::size_t p = 0; p < snap.taps.size(); ++p)
        for (std::size_t k = 0; k < snap.taps[p].size(); ++k) snap.taps[p][k] += static_snap.taps[p][k];
      snap = add_noise(snap, sc_.snr_db, rng.engine()());
      if (sc_.random_phase) {
        const cplx rot = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
        for (auto& pair : snap.taps)
          for (auto& v : pair) v *= rot;
      }
      LinkSignature sig = ctls_from_snapshot(snap, snap.k1, snap.k2);
      out.push_back(sc_.kind == SignatureKind::complex ? std::move(sig) : tls_from_ctls(sig));
    }
    return out;
  }

 private:
  const Scenario& sc_;
  FrequencyGrid grid_;
  std::uint64_t seed_;
  MultipathChannel static_;
  MultipathChannel dynamic_;
  std::vector<double> path_power_;
};

ScenarioTraces trial_traces(const Scenario& sc, std::uint64_t seed, std::size_t trial) {
  const std::uint64_t trial_seed = derive_seed(seed, {trial});
  LinkSimulator link(sc, trial_seed);
  Rng rng(derive_seed(trial_seed, {4}));
  const double lambda = kSpeedOfLight / sc.channel.carrier_hz;
  const auto warm = static_cast<std::size_t>(warmup_steps(sc.detector));

  ScenarioTraces out;
  std::vector<Vec2> still(warm + static_cast<std::size_t>(sc.h0_decisions_per_trial), Vec2{});
  out.h0.push_back({link.trace(still, 0), std::nullopt});

  const double heading = rng.uniform(0.0, 2.0 * kPi);
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  if (sc.use_case == UseCase::jump) {
    // The history is full of pre-move signatures when the move is scored.
    const auto before = static_cast<std::size_t>(sc.detector.delay + sc.detector.history_size);
    std::vector<Vec2> pos(before + 1, Vec2{});
    const double dist = rng.uniform(sc.jump_min_wavelengths, sc.jump_max_wavelengths) * lambda;
    pos.back() = dist * dir;
    out.h1.push_back({link.trace(pos, 1), before});
  } else {
    std::vector<Vec2> pos(warm + static_cast<std::size_t>(sc.moving_decisions_per_trial));
    const double step = sc.speed_mps * sc.probe_interval_s;
    for (std::size_t n = 0; n < pos.size(); ++n) pos[n] = (step * static_cast<double>(n)) * dir;
    out.h1.push_back({link.trace(pos, 1), std::nullopt});
  }
  return out;
}

}  // namespace

ScenarioTraces generate_traces(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  std::vector<ScenarioTraces> per_trial(static_cast<std::size_t>(scenario.trials));
  parallel_for(per_trial.size(), [&](std::size_t t) { per_trial[t] = trial_traces(scenario, seed, t); });
  ScenarioTraces out;
  for (auto& t : per_trial) {
    for (auto& tr : t.h0) out.h0.push_back(std::move(tr));
    for (auto& tr : t.h1) out.h1.push_back(std::move(tr));
  }
  return out;
}

ScenarioResult evaluate_scenario(const Scenario& scenario, std::uint64_t seed, const std::string& tag) {
  scenario.validate();
  std::vector<std::vector<DeltaSample>> per_trial(static_cast<std::size_t>(scenario.trials));
  parallel_for(per_trial.size(), [&](std::size_t t) {
    const auto traces = trial_traces(scenario, seed, t);
    per_trial[t] = collect_deltas(traces.h0, traces.h1, scenario.detector, tag);
  });
  ScenarioResult r;
  for (auto& v : per_trial) r.samples.insert(r.samples.end(), v.begin(), v.end());
  for (const auto& s : r.samples) (s.hypothesis == Hypothesis::h0 ? r.h0_count : r.h1_count)++;
  r.roc = roc(r.samples);
  r.pm = measurable_pm(pm_at_pfa(r.roc, scenario.target_pfa), r.h1_count);
  return r;
}

namespace {

int parse_grid_int(const std::string& value, SweepKind kind) {
  int v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    fail(Errc::invalid_grid, std::string(to_string(kind)) + " grid value '" + value + "' is not an integer");
  return v;
}

}  // namespace

Scenario apply_sweep_value(const Scenario& base, SweepKind kind, const std::string& value) {
  Scenario s = base;
  switch (kind) {
    case SweepKind::history: {
      const int n = parse_grid_int(value, kind);
      if (n < 3) fail(Errc::invalid_grid, "history size " + value + " is below the floor of 3");
      s.detector.history_size = n;
      break;
    }
    case SweepKind::delay: {
      const int d = parse_grid_int(value, kind);
      if (d < 1) fail(Errc::invalid_grid, "delay " + value + " is below the minimum of 1");
      s.detector.delay = d;
      break;
    }
    case SweepKind::antennas: {
      const int pairs = parse_grid_int(value, kind);
      const int k = static_cast<int>(std::lround(std::sqrt(std::max(pairs, 0))));
      if (pairs < 1 || k * k != pairs)
        fail(Errc::invalid_grid, "antenna-pair count " + value + " is not a square k1*k2 with k1 = k2");
      if (k > base.channel.tx_array.element_count || k > base.channel.rx_array.element_count)
        fail(Errc::invalid_grid, "antenna-pair count " + value + " exceeds the available arrays");
      s.antennas_tx = k;
      s.antennas_rx = k;
      break;
    }
    case SweepKind::bandwidth: {
      const int mhz = parse_grid_int(value, kind);
      if (mhz < 4 || mhz % 2 != 0 || mhz / 2 > base.tones)
        fail(Errc::invalid_grid, "bandwidth " + value + " MHz is not an even span of 2.." +
                                     std::to_string(base.tones) + " sounded tones");
      s.tones = mhz / 2;
      break;
    }
    case SweepKind::signature:
      if (value == "ctls-l2") {
        s.kind = SignatureKind::complex;
        s.detector.norm = NormKind::l2;
      } else if (value == "ctls-phi2") {
        s.kind = SignatureKind::complex;
        s.detector.norm = NormKind::phi2;
      } else if (value == "tls-l2") {
        s.kind = SignatureKind::magnitude;
        s.detector.norm = NormKind::l2;
      } else {
        fail(Errc::invalid_grid, "signature grid value '" + value + "' is not one of ctls-l2, ctls-phi2, tls-l2");
      }
      break;
  }
  return s;
}

std::vector<SweepRow> sweep(SweepKind kind, std::span<const std::string> grid, const Scenario& base,
                            std::uint64_t seed) {
  require(!grid.empty(), Errc::invalid_grid, "sweep grid is empty");
  std::vector<Scenario> scenarios;
  for (const auto& v : grid) scenarios.push_back(apply_sweep_value(base, kind, v));
  std::vector<SweepRow> rows;
  // Every grid value sees the same channels and noise draws.
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto r = evaluate_scenario(scenarios[i], seed, grid[i]);
    rows.push_back({grid[i], scenarios[i].target_pfa, r.pm, r.roc, r.h1_count});
  }
  return rows;
}

std::vector<std::pair<double, double>> avg_distance_vs_separation(const ChannelSpec& channel,
                                                                  const FrequencyGrid& grid,
                                                                  std::span<const double> separations_m,
                                                                  NormKind norm, int trials, std::uint64_t seed) {
  require(trials >= 1, Errc::invalid_argument, "trials must be positive");
  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
  parallel_for(per_trial.size(), [&](std::size_t t) {
    const auto ch = channel.draw(derive_seed(seed, {t}));
    const auto ref = ctls_from_snapshot(snapshot_at(ch, Vec2{}, grid), ch.tx_array.element_count,
                                        ch.rx_array.element_count);
    auto& d = per_trial[t];
    for (double sep : separations_m) {
      const auto snap = snapshot_at(ch, Vec2{sep, 0.0}, grid);
      d.push_back(distance(ref, ctls_from_snapshot(snap, snap.k1, snap.k2), norm));
    }
  });
  std::vector<std::pair<double, double>> out;
  for (std::size_t s = 0; s < separations_m.size(); ++s) {
    double sum = 0.0;
    for (const auto& d : per_trial) sum += d[s];
    out.emplace_back(separations_m[s], sum / trials);
  }
  return out;
}

std::vector<JitterInflation> jitter_inflation(const ChannelSpec& channel, const SoundingConfig& sounding,
                                              double jitter_std_taps, std::span<const int> tone_counts,
                                              int trials, int measurements, std::uint64_t seed) {
  require(trials >= 1 && measurements >= 2, Errc::invalid_argument, "need trials >= 1 and measurements >= 2");
  require(jitter_std_taps >= 0.0, Errc::invalid_argument, "jitter std must be nonnegative");
  const int available = sounding_grid(sounding).bins;
  for (int t : tone_counts)
    require(t >= 2 && t <= available, Errc::invalid_argument, "tone count outside the sounded grid");

  ChannelSpec spec = channel;
  spec.tx_array.element_count = 1;
  spec.rx_array.element_count = 1;
  const std::size_t nt = tone_counts.size();
  // Per trial: sums of relative consecutive distances, [with, without] per tone count.
  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials), std::vector<double>(2 * nt, 0.0));
  parallel_for(per_trial.size(), [&](std::size_t t) {
    const auto ch = spec.draw(derive_seed(seed, {t, 1}));
    Rng rng(derive_seed(seed, {t, 2}));
    std::vector<SoundedResponse> with, without;
    for (int m = 0; m < measurements; ++m) {
      const std::uint64_t noise_seed = derive_seed(seed, {t, 3, static_cast<std::uint64_t>(m)});
      SoundingConfig cfg = sounding;
      cfg.sync_jitter_samples = 0.0;
      without.push_back(sound_frequency_response(ch, Vec2{}, cfg, noise_seed));
      cfg.sync_jitter_samples = rng.normal(0.0, jitter_std_taps);
      with.push_back(sound_frequency_response(ch, Vec2{}, cfg, noise_seed));
    }
    for (std::size_t c = 0; c < nt; ++c) {
      for (int variant = 0; variant < 2; ++variant) {
        const auto& seq = variant == 0 ? with : without;
        double sum = 0.0;
        for (int m = 1; m < measurements; ++m) {
          const auto a = ctls_from_snapshot(to_snapshot(seq[m - 1], m - 1, Vec2{}, tone_counts[c]), 1, 1);
          const auto b = ctls_from_snapshot(to_snapshot(seq[m], m, Vec2{}, tone_counts[c]), 1, 1);
          sum += phi2_dist(a, b) / std::sqrt(a.norm_squared());
        }
        per_trial[t][2 * c + variant] = sum / (measurements - 1);
      }
    }
  });
  std::vector<JitterInflation> out;
  for (std::size_t c = 0; c < nt; ++c) {
    JitterInflation j;
    j.tones = tone_counts[c];
    for (const auto& v : per_trial) {
      j.mean_with_jitter += v[2 * c];
      j.mean_without_jitter += v[2 * c + 1];
    }
    j.mean_with_jitter /= trials;
    j.mean_without_jitter /= trials;
    j.ratio = j.mean_with_jitter / j.mean_without_jitter;
    out.push_back(j);
  }
  return out;
}

}  // namespace locdist
