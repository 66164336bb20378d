#include "locdist_cli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "locdist/chanmodel.hpp"
#include "locdist/csv.hpp"
#include "locdist/detector.hpp"
#include "locdist/error.hpp"
#include "locdist/evalharness.hpp"
#include "locdist/random.hpp"
#include "locdist/sigmetric.hpp"
#include "locdist/sounder.hpp"
#include "locdist/trace.hpp"

namespace locdist::cli {

namespace {

// Thrown for invalid flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, NormKind> kNorms{{"l2", NormKind::l2}, {"phi2", NormKind::phi2}};
const std::map<std::string, SignatureKind> kKinds{{"ctls", SignatureKind::complex},
                                                  {"tls", SignatureKind::magnitude}};
const std::map<std::string, SigmaMode> kSigmaModes{{"paper", SigmaMode::paper},
                                                   {"mean-pairwise", SigmaMode::mean_pairwise}};
const std::map<std::string, SweepKind> kSweepKinds{{"history", SweepKind::history},
                                                   {"delay", SweepKind::delay},
                                                   {"antennas", SweepKind::antennas},
                                                   {"bandwidth", SweepKind::bandwidth},
                                                   {"signature", SweepKind::signature}};

struct ChannelFlags {
  std::uint64_t seed = 1;
  int paths = 64;
  double delay_spread_ns = 100.0;
  double carrier_hz = 2.55e9;
  int k1 = 1;
  int k2 = 1;
  double snr_db = 25.0;
  double speed_mps = 0.0;
  double heading_deg = 0.0;
  double interval_s = 3.2e-3;
  int count = 100;
  bool random_phase = false;
  std::string out;
};

void add_channel_flags(CLI::App& app, ChannelFlags& f) {
  app.add_option("--seed", f.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--paths", f.paths, "Number of multipath components")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--delay-spread-ns", f.delay_spread_ns, "Mean path delay")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--carrier-hz", f.carrier_hz, "Carrier frequency")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--k1", f.k1, "Transmit antennas (uniform circular array)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--k2", f.k2, "Receive antennas (uniform circular array)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--snr-db", f.snr_db, "Per-measurement SNR; 'inf' disables noise")->capture_default_str();
  app.add_option("--speed-mps", f.speed_mps, "Receiver speed")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--heading-deg", f.heading_deg, "Direction of travel")->capture_default_str();
  app.add_option("--interval-s", f.interval_s, "Time between measurements")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--count", f.count, "Number of measurements")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--random-phase", f.random_phase, "Rotate each measurement by a random carrier phase");
  app.add_option("--out", f.out, "Output snapshot trace")->required();
}

MultipathChannel channel_from(const ChannelFlags& f) {
  return make_random_channel(f.seed, f.paths, f.delay_spread_ns * 1e-9, f.carrier_hz,
                             {ArrayKind::uniform_circular, f.k1, 0.5}, {ArrayKind::uniform_circular, f.k2, 0.5});
}

Trajectory trajectory_from(const ChannelFlags& f) {
  const double h = f.heading_deg * kPi / 180.0;
  return {Vec2{}, f.speed_mps * Vec2{std::cos(h), std::sin(h)}, f.interval_s, f.count};
}

void rotate_phase(ChannelSnapshot& s, std::uint64_t seed) {
  Rng rng(seed);
  const cplx rot = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  for (auto& pair : s.taps)
    for (auto& v : pair) v *= rot;
}

struct DetectorFlags {
  int history = 5;
  int delay = 1;
  std::string norm = "phi2";
  std::string kind = "ctls";
  std::string sigma_mode = "paper";
  double threshold = 1.0;
};

void add_detector_flags(CLI::App& app, DetectorFlags& f, bool with_threshold) {
  app.add_option("--history", f.history, "History size N (at least 3)")->capture_default_str();
  app.add_option("--delay", f.delay, "Delay-buffer length D (at least 1)")->capture_default_str();
  app.add_option("--norm", f.norm, "Distance")->check(CLI::IsMember({"l2", "phi2"}))->capture_default_str();
  app.add_option("--kind", f.kind, "Signature kind")->check(CLI::IsMember({"ctls", "tls"}))->capture_default_str();
  app.add_option("--sigma-mode", f.sigma_mode, "History normalizer")
      ->check(CLI::IsMember({"paper", "mean-pairwise"}))
      ->capture_default_str();
  if (with_threshold) app.add_option("--threshold", f.threshold, "Alarm threshold gamma")->capture_default_str();
}

DetectorConfig detector_from(const DetectorFlags& f) {
  if (f.history < 3)
    throw UsageError("--history: history size " + std::to_string(f.history) + " is below the floor of 3");
  if (f.delay < 1) throw UsageError("--delay: delay " + std::to_string(f.delay) + " is below the minimum of 1");
  if (!(f.threshold > 0.0) || !std::isfinite(f.threshold))
    throw UsageError("--threshold: threshold must be positive and finite");
  if (f.kind == "tls" && f.norm != "l2") throw UsageError("--norm: tls signatures are compared with l2 only");
  return {f.history, f.delay, f.threshold, kNorms.at(f.norm), kSigmaModes.at(f.sigma_mode)};
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Location distinction from MIMO temporal link signatures", "locdist"};
  app.require_subcommand(1);

  // simulate
  ChannelFlags sim;
  double sim_bandwidth_mhz = 40.0;
  int sim_taps = 40;
  auto* simulate = app.add_subcommand("simulate", "Snapshot trace from the channel model plus noise");
  add_channel_flags(*simulate, sim);
  simulate->add_option("--bandwidth-mhz", sim_bandwidth_mhz, "Span of the frequency grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--taps", sim_taps, "Impulse-response taps M")->check(CLI::Range(2, 1 << 16))->capture_default_str();

  // sound
  ChannelFlags snd;
  std::string method = "multitone";
  double jitter = 0.0;
  double cfo_hz = 0.0;
  int tones = 40;
  auto* sound = app.add_subcommand("sound", "Snapshot trace from waveform-level channel sounding");
  add_channel_flags(*sound, snd);
  sound->add_option("--method", method, "Sounding waveform")
      ->check(CLI::IsMember({"multitone", "ofdm"}))
      ->capture_default_str();
  sound->add_option("--jitter-samples", jitter, "Std of the per-measurement timing error, in impulse-response taps")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sound->add_option("--cfo-hz", cfo_hz, "Carrier frequency offset (ofdm)")->capture_default_str();
  sound->add_option("--tones", tones, "Multitone probe tones at 1 MHz spacing")
      ->check(CLI::Range(2, 49))
      ->capture_default_str();

  // detect
  DetectorFlags det;
  std::string detect_in, detect_out;
  auto* detect = app.add_subcommand("detect", "Run the detector over a trace");
  detect->add_option("--in", detect_in, "Snapshot or signature trace")->required();
  add_detector_flags(*detect, det, true);
  detect->add_option("--out", detect_out, "Decisions CSV")->required();

  // roc
  DetectorFlags roc_det;
  std::vector<std::string> h0_paths, h1_paths;
  std::string roc_out, h1_mode = "all";
  auto* roc_cmd = app.add_subcommand("roc", "Empirical ROC from H0 and H1 traces");
  roc_cmd->add_option("--h0", h0_paths, "Traces of a stationary transmitter")->required();
  roc_cmd->add_option("--h1", h1_paths, "Traces of a moved or moving transmitter")->required();
  roc_cmd->add_option("--h1-mode", h1_mode,
                      "all: every post-warm-up decision is H1; jump: only the first record at a new position")
      ->check(CLI::IsMember({"all", "jump"}))
      ->capture_default_str();
  add_detector_flags(*roc_cmd, roc_det, false);
  roc_cmd->add_option("--out", roc_out, "ROC CSV")->required();

  // sweep
  std::string sweep_kind, sweep_grid, sweep_out, sweep_roc_out, use_case = "jump";
  double target_pfa = 2e-3;
  std::uint64_t sweep_seed = 1;
  Scenario base = standard_scenario();
  int antennas = 1;
  bool phase_sync = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Miss rate at a false-alarm target over a parameter grid");
  sweep_cmd->add_option("--kind", sweep_kind, "Swept parameter")
      ->check(CLI::IsMember({"history", "delay", "antennas", "bandwidth", "signature"}))
      ->required();
  sweep_cmd->add_option("--grid", sweep_grid, "Comma-separated values")->required();
  sweep_cmd->add_option("--target-pfa", target_pfa, "False-alarm target")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_seed, "Seed")->capture_default_str();
  sweep_cmd->add_option("--trials", base.trials, "Trials per hypothesis and grid value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--antennas", antennas, "Square array size k (k1 = k2 = k)")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  sweep_cmd->add_option("--snr-db", base.snr_db, "Per-measurement SNR")->capture_default_str();
  sweep_cmd->add_option("--history", base.detector.history_size, "History size N")->capture_default_str();
  sweep_cmd->add_option("--delay", base.detector.delay, "Delay D")->capture_default_str();
  sweep_cmd->add_option("--use-case", use_case, "jump: relocation after a stationary period; moving: continuous motion")
      ->check(CLI::IsMember({"jump", "moving"}))
      ->capture_default_str();
  sweep_cmd->add_flag("--phase-sync", phase_sync, "Synchronized carrier phase, compared with l2");
  sweep_cmd->add_option("--out", sweep_out, "Sweep CSV")->required();
  sweep_cmd->add_option("--roc-out", sweep_roc_out, "Optional CSV with the full ROC of every grid value");

  // fit
  std::string fit_in, fit_out;
  auto* fit = app.add_subcommand("fit", "Inverse power-law fit of an antenna sweep");
  fit->add_option("--in", fit_in, "Antenna sweep CSV")->required();
  fit->add_option("--out", fit_out, "Fit CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      const auto channel = channel_from(sim);
      const FrequencyGrid grid{sim_bandwidth_mhz * 1e6, sim_taps, 0.5, {}};
      auto snaps = walk_snapshots(channel, trajectory_from(sim), grid);
      for (auto& s : snaps) {
        const auto n = static_cast<std::uint64_t>(s.meas_index);
        s = add_noise(s, sim.snr_db, derive_seed(sim.seed, {1, n}));
        if (sim.random_phase) rotate_phase(s, derive_seed(sim.seed, {2, n}));
      }
      write_trace(sim.out, trace_from_snapshots(snaps, sim.carrier_hz, sim.interval_s));
      return kExitOk;
    }

    if (sound->parsed()) {
      const auto channel = channel_from(snd);
      const auto traj = trajectory_from(snd);
      SoundingConfig cfg;
      cfg.method = method == "ofdm" ? SoundingMethod::ofdm : SoundingMethod::multitone;
      cfg.snr_db = snd.snr_db;
      cfg.tones_B = tones - 1;
      cfg.cfo_hz = cfo_hz;
      Rng jitter_rng(derive_seed(snd.seed, {3}));
      std::vector<ChannelSnapshot> snaps;
      for (int n = 0; n < snd.count; ++n) {
        cfg.sync_jitter_samples = jitter > 0.0 ? jitter_rng.normal(0.0, jitter) : 0.0;
        auto s = sound_snapshot(channel, traj.position(n), cfg, n, derive_seed(snd.seed, {1, static_cast<std::uint64_t>(n)}));
        if (snd.random_phase) rotate_phase(s, derive_seed(snd.seed, {2, static_cast<std::uint64_t>(n)}));
        snaps.push_back(std::move(s));
      }
      write_trace(snd.out, trace_from_snapshots(snaps, snd.carrier_hz, snd.interval_s));
      return kExitOk;
    }

    if (detect->parsed()) {
      const auto config = detector_from(det);
      const auto sigs = signatures_from_trace(read_trace(detect_in), kKinds.at(det.kind));
      const auto decisions = run_trace(config, sigs);
      CsvTable table{{"meas_index", "verdict", "delta"}, {}};
      for (const auto& d : decisions)
        table.rows.push_back({std::to_string(d.meas_index), std::string(to_string(d.verdict)),
                              d.delta ? format_double(*d.delta) : std::string()});
      write_csv(detect_out, table);
      return kExitOk;
    }

    if (roc_cmd->parsed()) {
      const auto config = detector_from(roc_det);
      const auto kind = kKinds.at(roc_det.kind);
      auto load = [&](const std::string& path, bool jump) {
        const auto trace = read_trace(path);
        SignatureTrace t{signatures_from_trace(trace, kind), std::nullopt};
        if (jump) {
          for (std::size_t i = 1; i < trace.records.size(); ++i)
            if (!(trace.records[i].pos == trace.records[0].pos)) {
              t.move_index = i;
              break;
            }
          if (!t.move_index) throw FileError(Errc::invalid_argument, path, 0, path + ": no record at a new position");
        }
        return t;
      };
      std::vector<SignatureTrace> h0, h1;
      for (const auto& p : h0_paths) h0.push_back(load(p, false));
      for (const auto& p : h1_paths) h1.push_back(load(p, h1_mode == "jump"));
      const auto points = roc(collect_deltas(h0, h1, config));
      CsvTable table{{"gamma", "pfa", "pd", "pm"}, {}};
      for (const auto& p : points)
        table.rows.push_back({format_double(p.gamma), format_double(p.pfa), format_double(p.pd), format_double(p.pm)});
      write_csv(roc_out, table);
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      base.antennas_tx = antennas;
      base.antennas_rx = antennas;
      base.target_pfa = target_pfa;
      base.use_case = use_case == "moving" ? UseCase::moving : UseCase::jump;
      if (phase_sync) {
        base.random_phase = false;
        base.detector.norm = NormKind::l2;
      }
      if (base.detector.history_size < 3)
        throw UsageError("--history: history size " + std::to_string(base.detector.history_size) +
                         " is below the floor of 3");
      if (base.detector.delay < 1) throw UsageError("--delay: delay must be at least 1");
      std::vector<std::string> grid;
      std::stringstream ss(sweep_grid);
      for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) grid.push_back(v);
      const auto kind = kSweepKinds.at(sweep_kind);
      // Reject bad grid values before any simulation starts.
      for (const auto& v : grid) apply_sweep_value(base, kind, v).validate();
      const auto rows = sweep(kind, grid, base, sweep_seed);
      CsvTable table{{"kind", "value", "target_pfa", "pm", "at_floor"}, {}};
      CsvTable roc_table{{"value", "gamma", "pfa", "pd", "pm"}, {}};
      for (const auto& r : rows) {
        table.rows.push_back({sweep_kind, r.value, format_double(r.target_pfa), format_double(r.pm.pm),
                              r.pm.at_floor ? "1" : "0"});
        for (const auto& p : r.roc)
          roc_table.rows.push_back(
              {r.value, format_double(p.gamma), format_double(p.pfa), format_double(p.pd), format_double(p.pm)});
      }
      write_csv(sweep_out, table);
      if (!sweep_roc_out.empty()) write_csv(sweep_roc_out, roc_table);
      return kExitOk;
    }

    if (fit->parsed()) {
      const auto table = read_csv(fit_in);
      const auto kind_col = table.column("kind");
      const auto value_col = table.column("value");
      const auto pm_col = table.column("pm");
      std::vector<std::pair<int, double>> points;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row[kind_col] != "antennas")
          throw FileError(Errc::invalid_argument, fit_in, i + 2,
                          fit_in + ":" + std::to_string(i + 2) + ": fit needs an antennas sweep");
        try {
          points.emplace_back(static_cast<int>(parse_double(row[value_col])), parse_double(row[pm_col]));
        } catch (const Error& e) {
          throw FileError(e.code(), fit_in, i + 2, fit_in + ":" + std::to_string(i + 2) + ": " + e.what());
        }
      }
      const auto f = fit_power_law(points);
      write_csv(fit_out, CsvTable{{"b", "m", "residual"}, {{format_double(f.b), format_double(f.m), format_double(f.residual)}}});
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FileError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    const bool usage = e.code() == Errc::invalid_config || e.code() == Errc::invalid_grid;
    err << (usage ? "usage error: " : "data error: ") << e.what() << "\n";
    return usage ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace locdist::cli
