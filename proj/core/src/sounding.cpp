#include <cmath>
#include <limits>
#include <string>

#include "locdist/dft.hpp"
#include "locdist/error.hpp"
#include "locdist/random.hpp"
#include "locdist/sounder.hpp"
#include "ofdm_internal.hpp"

namespace locdist {
namespace {

double mean_power(std::span<const cplx> x) {
  double p = 0.0;
  for (auto v : x) p += std::norm(v);
  return x.empty() ? 0.0 : p / static_cast<double>(x.size());
}

void add_awgn(CVec& x, double signal_power, double snr_db, Rng& rng) {
  if (snr_db == std::numeric_limits<double>::infinity()) return;
  const double variance = signal_power / std::pow(10.0, snr_db / 10.0);
  for (auto& v : x) v += rng.complex_normal(variance);
}

void rotate(CVec& x, double cfo_hz, double fs) {
  if (cfo_hz == 0.0) return;
  for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, 2.0 * kPi * cfo_hz * static_cast<double>(n) / fs);
}

SoundedResponse sound_multitone(const MultipathChannel& channel, Vec2 disp, const SoundingConfig& cfg,
                                std::uint64_t seed) {
  const MultitoneProbe probe =
      make_multitone(cfg.tones_B, cfg.probe_seed, cfg.sample_rate_hz, cfg.duration_s, cfg.window_frac).probe;
  const CVec tx = probe.analytic_waveform();
  const std::size_t n = tx.size();
  for (double f : probe.tone_hz) {
    const double bin = f * static_cast<double>(n) / cfg.sample_rate_hz;
    require(std::abs(bin - std::round(bin)) < 1e-9, Errc::invalid_argument,
            "multitone tones must fall on FFT bins of the burst; choose duration * 0.5 MHz integral");
  }
  std::vector<double> bin_freqs(n);
  for (std::size_t k = 0; k < n; ++k) bin_freqs[k] = dsp::bin_frequency(k, n, cfg.sample_rate_hz);
  // The probe repeats continuously, so the channel acts circularly on a burst.
  const auto response = frequency_response(channel, disp, bin_freqs);
  const CVec tx_spec = dsp::fft(tx);

  SoundedResponse out;
  out.grid = sounding_grid(cfg);
  out.k1 = channel.tx_array.element_count;
  out.k2 = channel.rx_array.element_count;
  const double tap_s = out.grid.sample_period_s();
  const double delay_samples = cfg.sync_jitter_samples * tap_s * cfg.sample_rate_hz;
  for (std::size_t pair = 0; pair < response.size(); ++pair) {
    CVec spec(n);
    for (std::size_t k = 0; k < n; ++k) spec[k] = tx_spec[k] * response[pair][k];
    CVec rx = dsp::ifft(spec);
    rx = dsp::circular_delay(rx, delay_samples);
    Rng rng(derive_seed(seed, {0x6d74ULL, pair}));
    add_awgn(rx, mean_power(rx), cfg.snr_db, rng);
    out.bins.push_back(estimate_freq_response(rx, probe));
  }
  return out;
}

SoundedResponse sound_ofdm(const MultipathChannel& channel, Vec2 disp, const SoundingConfig& cfg,
                           std::uint64_t seed) {
  const OfdmConfig& ofdm = cfg.ofdm;
  ofdm.validate();
  const double fs = ofdm.sample_rate_hz();
  const int k1 = channel.tx_array.element_count;
  const int k2 = channel.rx_array.element_count;
  const auto nfft = static_cast<std::size_t>(ofdm.n_subcarriers);

  const WalshMatrix walsh = make_walsh_training(k1, ofdm.n_train_symbols);
  const auto fields = detail::preamble_fields(cfg.preamble, ofdm);

  std::vector<double> bin_freqs(nfft);
  for (std::size_t k = 0; k < nfft; ++k) bin_freqs[k] = dsp::bin_frequency(k, nfft, fs);
  const auto h_bins = frequency_response(channel, disp, bin_freqs);

  // Each field and symbol meets the channel circularly, as behind an ideal
  // cyclic prefix. Only tx antenna 0 sends the preamble.
  std::vector<CVec> rx(static_cast<std::size_t>(k2));
  const auto guard = static_cast<std::size_t>(cfg.guard_samples);
  for (int j = 0; j < k2; ++j) {
    CVec& r = rx[static_cast<std::size_t>(j)];
    r.assign(guard, cplx{});
    for (const auto& field : fields) {
      const auto resp = frequency_response(channel, disp, field.freqs_hz);
      const CVec x = detail::render_field(field, resp[static_cast<std::size_t>(j)]);
      r.insert(r.end(), x.begin(), x.end());
    }
    for (std::size_t t = 0; t < walsh.front().size(); ++t) {
      CVec spec(nfft, cplx{});
      for (int s = -ofdm.n_subcarriers / 2; s < ofdm.n_subcarriers / 2; ++s) {
        if (ofdm.is_null(s)) continue;
        const auto b = static_cast<std::size_t>(ofdm.fft_bin(s));
        cplx acc{};
        for (int i = 0; i < k1; ++i)
          acc += h_bins[static_cast<std::size_t>(i * k2 + j)][b] *
                 static_cast<double>(walsh[static_cast<std::size_t>(i)][t]);
        spec[b] = acc * ofdm.pilot(s);
      }
      CVec sym = dsp::ifft(spec);
      for (auto& v : sym) v *= std::sqrt(static_cast<double>(nfft));
      r.insert(r.end(), sym.end() - ofdm.cp_samples(), sym.end());
      r.insert(r.end(), sym.begin(), sym.end());
    }
    const double p = mean_power(std::span<const cplx>(r).subspan(guard));
    r.insert(r.end(), guard, cplx{});
    rotate(r, cfg.cfo_hz, fs);
    r = dsp::circular_delay(r, cfg.sync_jitter_samples);
    Rng rng(derive_seed(seed, {0x6f66ULL, static_cast<std::uint64_t>(j)}));
    add_awgn(r, p, cfg.snr_db, rng);
  }

  // Receiver: timing on antenna 0, then coarse and fine Moose carrier
  // recovery with correlations pooled over all receive antennas.
  const std::size_t start = frame_sync(rx.front(), cfg.preamble, fs);
  const auto ps = cfg.preamble.short_period(fs), ts = cfg.preamble.short_total(fs);
  const auto pl = cfg.preamble.long_period(fs), tl = cfg.preamble.long_total(fs);
  auto pooled_cfo = [&](std::size_t first, std::size_t len, int period) {
    cplx corr{};
    for (const auto& r : rx) {
      for (std::size_t n = first; n + static_cast<std::size_t>(period) < first + len; ++n)
        corr += r[n + static_cast<std::size_t>(period)] * std::conj(r[n]);
    }
    if (std::abs(corr) == 0.0) fail(Errc::degenerate_input, "preamble correlation vanishes");
    return std::arg(corr) * fs / (2.0 * kPi * period);
  };
  const double coarse = pooled_cfo(start, static_cast<std::size_t>(ts), ps);
  for (auto& r : rx) rotate(r, -coarse, fs);
  const auto long_start = start + static_cast<std::size_t>(ts + tl - 2 * pl);
  const double fine = pooled_cfo(long_start, static_cast<std::size_t>(2 * pl), pl);
  for (auto& r : rx) rotate(r, -fine, fs);

  const std::size_t train_start = start + static_cast<std::size_t>(ts + tl);
  const std::size_t train_len = walsh.front().size() * static_cast<std::size_t>(ofdm.symbol_samples());
  std::vector<CVec> training(rx.size());
  for (std::size_t j = 0; j < rx.size(); ++j) {
    require(train_start + train_len <= rx[j].size(), Errc::sync_failure, "frame truncated after sync");
    training[j].assign(rx[j].begin() + static_cast<std::ptrdiff_t>(train_start),
                       rx[j].begin() + static_cast<std::ptrdiff_t>(train_start + train_len));
  }
  const OfdmChannelEstimate est = estimate_mimo_ofdm_channel(training, walsh, ofdm);

  SoundedResponse out;
  out.grid = sounding_grid(cfg);
  out.k1 = k1;
  out.k2 = k2;
  const int half = ofdm.n_subcarriers / 2;
  for (int i = 0; i < k1; ++i) {
    for (int j = 0; j < k2; ++j) {
      CVec bins(nfft, cplx{});
      for (int s = -half; s < half; ++s)
        if (const auto* e = est.find(s)) bins[static_cast<std::size_t>(s + half)] = e->h[static_cast<std::size_t>(j * k1 + i)];
      out.bins.push_back(std::move(bins));
    }
  }
  return out;
}

}  // namespace

FrequencyGrid sounding_grid(const SoundingConfig& cfg) {
  if (cfg.method == SoundingMethod::multitone) {
    const int tones = cfg.tones_B + 1;
    return FrequencyGrid{tones * kToneSpacingHz, tones, 0.5, {}};
  }
  const int n = cfg.ofdm.n_subcarriers;
  return FrequencyGrid{cfg.ofdm.sample_rate_hz(), n, -n / 2.0, cfg.ofdm.null_grid_bins()};
}

SoundedResponse sound_frequency_response(const MultipathChannel& channel, Vec2 rx_displacement_m,
                                         const SoundingConfig& cfg, std::uint64_t seed) {
  channel.validate();
  require(std::isfinite(cfg.sync_jitter_samples), Errc::invalid_argument, "jitter must be finite");
  return cfg.method == SoundingMethod::multitone ? sound_multitone(channel, rx_displacement_m, cfg, seed)
                                                 : sound_ofdm(channel, rx_displacement_m, cfg, seed);
}

ChannelSnapshot to_snapshot(const SoundedResponse& response, std::int64_t meas_index, Vec2 position_m, int bins) {
  const int total = response.grid.bins;
  if (bins == 0) bins = total;
  require(bins >= 2 && bins <= total, Errc::invalid_argument,
          "cannot take " + std::to_string(bins) + " of " + std::to_string(total) + " bins");
  ChannelSnapshot s;
  s.k1 = response.k1;
  s.k2 = response.k2;
  s.M = bins;
  s.sample_period_s = 1.0 / (bins * response.grid.spacing_hz());
  s.meas_index = meas_index;
  s.position_m = position_m;
  std::vector<int> nulls;
  for (int k : response.grid.null_bins)
    if (k < bins) nulls.push_back(k);
  for (const auto& b : response.bins)
    s.taps.push_back(freq_to_cir(std::span<const cplx>(b).first(static_cast<std::size_t>(bins)), bins, nulls));
  return s;
}

ChannelSnapshot sound_snapshot(const MultipathChannel& channel, Vec2 rx_displacement_m, const SoundingConfig& cfg,
                               std::int64_t meas_index, std::uint64_t seed) {
  return to_snapshot(sound_frequency_response(channel, rx_displacement_m, cfg, seed), meas_index, rx_displacement_m);
}

ChannelSnapshot truth_snapshot(const MultipathChannel& channel, Vec2 rx_displacement_m, const SoundingConfig& cfg,
                               std::int64_t meas_index) {
  return snapshot_at(channel, rx_displacement_m, sounding_grid(cfg), meas_index);
}

}  // namespace locdist
