#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "locdist/dft.hpp"
#include "locdist/error.hpp"
#include "locdist/random.hpp"
#include "locdist/sounder.hpp"
#include "ofdm_internal.hpp"

namespace locdist {
namespace {

int to_samples(double seconds, double fs, const char* what) {
  const double n = seconds * fs;
  const auto r = std::llround(n);
  require(r > 0 && std::abs(n - static_cast<double>(r)) < 1e-6, Errc::invalid_argument,
          std::string(what) + " is not a whole number of samples");
  return static_cast<int>(r);
}

}  // namespace

// ---------------------------------------------------------------------------
// OfdmConfig

void OfdmConfig::validate() const {
  require(n_subcarriers >= 4 && n_subcarriers % 2 == 0, Errc::invalid_argument, "subcarrier count must be even");
  require(subcarrier_spacing_hz > 0.0, Errc::invalid_argument, "subcarrier spacing must be positive");
  require(n_train_symbols >= 1, Errc::invalid_argument, "need at least one training symbol");
  for (int s : null_indices)
    require(s >= -n_subcarriers / 2 && s < n_subcarriers / 2, Errc::invalid_argument,
            "null subcarrier " + std::to_string(s) + " outside the band");
  require(symbol_samples() == n_subcarriers + cp_samples(), Errc::invalid_argument,
          "symbol length must equal FFT length plus cyclic prefix");
}

int OfdmConfig::cp_samples() const { return to_samples(cp_s, sample_rate_hz(), "cyclic prefix"); }
int OfdmConfig::symbol_samples() const { return to_samples(symbol_s, sample_rate_hz(), "OFDM symbol"); }

bool OfdmConfig::is_null(int subcarrier) const {
  return std::find(null_indices.begin(), null_indices.end(), subcarrier) != null_indices.end();
}

double OfdmConfig::pilot(int subcarrier) const {
  return (derive_seed(0x70696c6fULL, {static_cast<std::uint64_t>(subcarrier + n_subcarriers)}) & 1U) ? 1.0 : -1.0;
}

int OfdmConfig::fft_bin(int subcarrier) const {
  return ((subcarrier % n_subcarriers) + n_subcarriers) % n_subcarriers;
}

std::vector<int> OfdmConfig::null_grid_bins() const {
  std::vector<int> out;
  for (int s : null_indices) out.push_back(s + n_subcarriers / 2);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Preamble

void PreambleConfig::validate(double fs) const {
  const int ps = short_period(fs), ts = short_total(fs), pl = long_period(fs), tl = long_total(fs);
  require(ts % ps == 0, Errc::invalid_argument, "short field must hold whole periods");
  require(ts >= 2 * ps && tl >= 2 * pl, Errc::invalid_argument, "preamble fields need at least two periods");
  require(sync_threshold > 0.0 && sync_threshold < 1.0, Errc::invalid_argument, "sync threshold must be in (0,1)");
}

int PreambleConfig::short_period(double fs) const { return to_samples(short_period_s, fs, "short period"); }
int PreambleConfig::short_total(double fs) const { return to_samples(short_total_s, fs, "short field"); }
int PreambleConfig::long_period(double fs) const { return to_samples(long_period_s, fs, "long period"); }
int PreambleConfig::long_total(double fs) const { return to_samples(long_total_s, fs, "long field"); }

namespace detail {

std::vector<PeriodicField> preamble_fields(const PreambleConfig& preamble, const OfdmConfig& ofdm) {
  ofdm.validate();
  const double fs = ofdm.sample_rate_hz();
  preamble.validate(fs);
  std::vector<PeriodicField> fields;
  const std::pair<int, int> shapes[] = {{preamble.short_period(fs), preamble.short_total(fs)},
                                        {preamble.long_period(fs), preamble.long_total(fs)}};
  std::uint64_t salt = 0x73746674ULL;
  for (auto [period, total] : shapes) {
    PeriodicField f;
    f.period = period;
    f.total = total;
    f.spectrum.assign(static_cast<std::size_t>(period), cplx{});
    f.freqs_hz.resize(static_cast<std::size_t>(period));
    Rng rng(salt++);
    int used = 0;
    for (int q = 0; q < period; ++q) {
      const double freq = dsp::bin_frequency(static_cast<std::size_t>(q), static_cast<std::size_t>(period), fs);
      f.freqs_hz[static_cast<std::size_t>(q)] = freq;
      const double sc = freq / ofdm.subcarrier_spacing_hz;
      const int s = static_cast<int>(std::lround(sc));
      const bool on_grid = std::abs(sc - s) < 1e-9;
      const int quadrant = static_cast<int>(rng.engine()() % 4);
      if (!on_grid || ofdm.is_null(s) || s == 0) continue;
      f.spectrum[static_cast<std::size_t>(q)] = std::polar(1.0, kPi / 4.0 + quadrant * kPi / 2.0);
      ++used;
    }
    require(used > 0, Errc::invalid_argument, "preamble field has no usable subcarriers");
    f.scale = period / std::sqrt(static_cast<double>(used));
    fields.push_back(std::move(f));
  }
  return fields;
}

CVec render_field(const PeriodicField& field, std::span<const cplx> response) {
  CVec spec = field.spectrum;
  for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= response[q];
  CVec period = dsp::ifft(spec);
  const int offset = field.total % field.period;
  CVec out(static_cast<std::size_t>(field.total));
  for (int n = 0; n < field.total; ++n) {
    const int idx = ((n - offset) % field.period + field.period) % field.period;
    out[static_cast<std::size_t>(n)] = field.scale * period[static_cast<std::size_t>(idx)];
  }
  return out;
}

}  // namespace detail

CVec make_preamble(const PreambleConfig& preamble, const OfdmConfig& ofdm) {
  CVec out;
  for (const auto& f : detail::preamble_fields(preamble, ofdm)) {
    const CVec flat(f.spectrum.size(), cplx{1.0, 0.0});
    const CVec x = detail::render_field(f, flat);
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Walsh-Hadamard training

WalshMatrix make_walsh_training(int k1, int n_symbols) {
  require(k1 >= 1, Errc::invalid_argument, "need at least one transmit antenna");
  require(n_symbols >= 1 && std::has_single_bit(static_cast<unsigned>(n_symbols)), Errc::invalid_argument,
          "training length " + std::to_string(n_symbols) + " is not a power of 2");
  require(n_symbols >= k1, Errc::invalid_argument,
          "training length " + std::to_string(n_symbols) + " shorter than antenna count " + std::to_string(k1));
  WalshMatrix w(static_cast<std::size_t>(k1), std::vector<int>(static_cast<std::size_t>(n_symbols)));
  for (int r = 0; r < k1; ++r)
    for (int c = 0; c < n_symbols; ++c)
      w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          (std::popcount(static_cast<unsigned>(r & c)) % 2 == 0) ? 1 : -1;
  return w;
}

// ---------------------------------------------------------------------------
// Synchronization

double moose_cfo_estimate(std::span<const cplx> rx, int period_samples, double sample_rate_hz) {
  require(period_samples >= 1, Errc::invalid_argument, "period must be positive");
  const auto p = static_cast<std::size_t>(period_samples);
  require(rx.size() >= 2 * p, Errc::invalid_argument, "CFO estimate needs two full periods");
  cplx corr{};
  double energy = 0.0;
  for (std::size_t n = 0; n + p < rx.size(); ++n) {
    corr += rx[n + p] * std::conj(rx[n]);
    energy += std::norm(rx[n]);
  }
  if (energy == 0.0 || std::abs(corr) <= 1e-12 * energy)
    fail(Errc::degenerate_input, "periodic correlation vanishes; no carrier offset can be estimated");
  return std::arg(corr) * sample_rate_hz / (2.0 * kPi * period_samples);
}

namespace {

// |sum x[d+n+lag] conj(x[d+n])| over the window, normalized by the mean energy
// of both halves; equals 1 exactly when the window is lag-periodic.
double periodicity(std::span<const cplx> x, std::size_t d, std::size_t lag, std::size_t window) {
  cplx corr{};
  double e = 0.0;
  for (std::size_t n = 0; n < window; ++n) {
    const cplx a = x[d + n];
    const cplx b = x[d + n + lag];
    corr += b * std::conj(a);
    e += std::norm(a) + std::norm(b);
  }
  return e > 0.0 ? 2.0 * std::abs(corr) / e : 0.0;
}

}  // namespace

std::size_t frame_sync(std::span<const cplx> rx, const PreambleConfig& preamble, double fs) {
  preamble.validate(fs);
  const auto ps = static_cast<std::size_t>(preamble.short_period(fs));
  const auto ts = static_cast<std::size_t>(preamble.short_total(fs));
  const auto pl = static_cast<std::size_t>(preamble.long_period(fs));
  const auto tl = static_cast<std::size_t>(preamble.long_total(fs));
  const std::size_t coarse_window = ts - ps;
  const std::size_t fine_window = tl - pl;

  if (rx.size() < ts + tl) fail(Errc::sync_failure, "input shorter than one preamble");

  double best = -1.0;
  std::size_t coarse = 0;
  for (std::size_t d = 0; d + coarse_window + ps <= rx.size(); ++d) {
    const double m = periodicity(rx, d, ps, coarse_window);
    if (m > best) {
      best = m;
      coarse = d;
    }
  }
  if (best < preamble.sync_threshold)
    fail(Errc::sync_failure, "no short-period structure (peak metric " + std::to_string(best) + ")");

  const std::size_t lo = coarse > ps ? coarse - ps : 0;
  const std::size_t hi = coarse + ps;
  double fine_best = -1.0;
  std::size_t start = coarse;
  for (std::size_t d = lo; d <= hi; ++d) {
    const std::size_t l = d + ts;
    if (l + fine_window + pl > rx.size()) break;
    const double m = periodicity(rx, l, pl, fine_window);
    if (m > fine_best) {
      fine_best = m;
      start = d;
    }
  }
  if (fine_best < preamble.sync_threshold)
    fail(Errc::sync_failure, "no long-period structure after the short field (peak metric " +
                                 std::to_string(fine_best) + ")");
  return start;
}

// ---------------------------------------------------------------------------
// Training and estimation

std::vector<CVec> ofdm_training_waveform(const WalshMatrix& training, const OfdmConfig& cfg) {
  cfg.validate();
  require(!training.empty(), Errc::invalid_argument, "empty training matrix");
  const int n = cfg.n_subcarriers;
  const int cp = cfg.cp_samples();
  const double gain = std::sqrt(static_cast<double>(n));
  std::vector<CVec> out;
  for (const auto& row : training) {
    CVec antenna;
    for (int chip : row) {
      CVec spec(static_cast<std::size_t>(n), cplx{});
      for (int s = -n / 2; s < n / 2; ++s)
        if (!cfg.is_null(s)) spec[static_cast<std::size_t>(cfg.fft_bin(s))] = chip * cfg.pilot(s);
      CVec sym = dsp::ifft(spec);
      for (auto& v : sym) v *= gain;
      antenna.insert(antenna.end(), sym.end() - cp, sym.end());
      antenna.insert(antenna.end(), sym.begin(), sym.end());
    }
    out.push_back(std::move(antenna));
  }
  return out;
}

const SubcarrierEstimate* OfdmChannelEstimate::find(int subcarrier) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), subcarrier,
                             [](const SubcarrierEstimate& e, int s) { return e.subcarrier < s; });
  return (it != entries.end() && it->subcarrier == subcarrier) ? &*it : nullptr;
}

cplx OfdmChannelEstimate::at(int subcarrier, int rx, int tx) const {
  const auto* e = find(subcarrier);
  require(e != nullptr, Errc::invalid_argument, "subcarrier " + std::to_string(subcarrier) + " not estimated");
  return e->h[static_cast<std::size_t>(rx * k1 + tx)];
}

OfdmChannelEstimate estimate_mimo_ofdm_channel(std::span<const CVec> rx_training, const WalshMatrix& training,
                                               const OfdmConfig& cfg) {
  cfg.validate();
  require(!training.empty() && !training.front().empty(), Errc::invalid_argument, "empty training matrix");
  require(!rx_training.empty(), Errc::invalid_argument, "no receive antennas");
  const auto n_sym = training.front().size();
  for (const auto& row : training)
    require(row.size() == n_sym, Errc::invalid_argument, "ragged training matrix");
  const int n = cfg.n_subcarriers;
  const auto sym_len = static_cast<std::size_t>(cfg.symbol_samples());
  const auto cp = static_cast<std::size_t>(cfg.cp_samples());
  for (const auto& r : rx_training)
    require(r.size() == n_sym * sym_len, Errc::invalid_argument,
            "receive antenna holds " + std::to_string(r.size()) + " samples, expected " +
                std::to_string(n_sym * sym_len));

  OfdmChannelEstimate est;
  est.k1 = static_cast<int>(training.size());
  est.k2 = static_cast<int>(rx_training.size());

  // freq[j][t] = spectrum of symbol t at rx antenna j
  const double gain = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::vector<CVec>> freq(rx_training.size());
  for (std::size_t j = 0; j < rx_training.size(); ++j) {
    for (std::size_t t = 0; t < n_sym; ++t) {
      auto first = rx_training[j].begin() + static_cast<std::ptrdiff_t>(t * sym_len + cp);
      CVec body(first, first + n);
      CVec spec = dsp::fft(body);
      for (auto& v : spec) v *= gain;
      freq[j].push_back(std::move(spec));
    }
  }

  for (int s = -n / 2; s < n / 2; ++s) {
    if (cfg.is_null(s)) continue;
    const auto bin = static_cast<std::size_t>(cfg.fft_bin(s));
    const double pilot = cfg.pilot(s);
    SubcarrierEstimate e;
    e.subcarrier = s;
    e.h.assign(static_cast<std::size_t>(est.k1 * est.k2), cplx{});
    for (int j = 0; j < est.k2; ++j) {
      for (int i = 0; i < est.k1; ++i) {
        cplx acc{};
        for (std::size_t t = 0; t < n_sym; ++t)
          acc += freq[static_cast<std::size_t>(j)][t][bin] * static_cast<double>(training[static_cast<std::size_t>(i)][t]);
        e.h[static_cast<std::size_t>(j * est.k1 + i)] = acc / (pilot * static_cast<double>(n_sym));
      }
    }
    est.entries.push_back(std::move(e));
  }
  return est;
}

}  // namespace locdist
