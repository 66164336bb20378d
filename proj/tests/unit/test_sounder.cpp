#include <doctest.h>

#include <cmath>
#include <random>

#include "locdist/error.hpp"
#include "locdist/random.hpp"
#include "locdist/sounder.hpp"
#include "oracles.hpp"

using namespace locdist;

namespace {

CVec circular_shift(const CVec& x, std::size_t d) {
  CVec y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[(n + d) % x.size()] = x[n];
  return y;
}

CVec with_noise(CVec x, double snr_db, std::uint64_t seed) {
  double p = 0.0;
  for (auto v : x) p += std::norm(v);
  p /= static_cast<double>(x.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(p / std::pow(10.0, snr_db / 10.0) / 2.0));
  for (auto& v : x) v += cplx{g(rng), g(rng)};
  return x;
}

}  // namespace

TEST_SUITE("sounder") {
  TEST_CASE("multitone probe tones and phases") {
    const auto burst = make_multitone(39, 5, 100e6, 4e-6, 0.25);
    REQUIRE(burst.probe.tone_hz.size() == 40);
    for (int i = 0; i < 40; ++i) CHECK(burst.probe.tone_hz[i] == doctest::Approx((i + 0.5) * 1e6));
    for (double th : burst.probe.phases_rad) {
      CHECK(th >= 0.0);
      CHECK(th <= kPi);
    }
    CHECK(make_multitone(39, 5, 100e6, 4e-6, 0.25).probe.phases_rad == burst.probe.phases_rad);
    CHECK(burst.samples.size() == 400);
    CHECK_THROWS_AS(make_multitone(39, 5, 60e6, 4e-6, 0.25), Error);
  }

  TEST_CASE("single unwindowed tone is a plain cosine") {
    MultitoneProbe p;
    p.B = 0;
    p.tone_hz = {0.5e6};
    p.phases_rad = {0.0};
    p.window_frac = 0.0;
    const auto w = p.real_waveform();
    for (std::size_t n = 0; n < w.size(); ++n)
      CHECK(w[n] == doctest::Approx(std::cos(oracle::kTwoPi * 0.5e6 * n / 100e6)).epsilon(1e-12));
  }

  TEST_CASE("estimate_freq_response on flat and delayed channels") {
    const auto burst = make_multitone(39, 2, 100e6, 4e-6, 0.25);
    const auto& x = burst.analytic;
    for (auto h : estimate_freq_response(x, burst.probe)) CHECK(std::abs(h - 1.0) < 1e-9);

    const cplx g = std::polar(0.5, kPi / 4.0);
    CVec scaled(x);
    for (auto& v : scaled) v *= g;
    for (auto h : estimate_freq_response(scaled, burst.probe)) CHECK(std::abs(h - g) < 1e-9);

    const auto H = estimate_freq_response(circular_shift(x, 3), burst.probe);
    for (int i = 0; i < 40; ++i) {
      const double want = -oracle::kTwoPi * burst.probe.tone_hz[i] * 3.0 / 100e6;
      CHECK(std::abs(std::arg(H[i] * std::polar(1.0, -want))) < 1e-6);
      CHECK(std::abs(H[i]) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(estimate_freq_response(CVec(10), burst.probe), Error);

    MultitoneProbe cancel = burst.probe;
    cancel.B = 1;
    cancel.tone_hz = {1.5e6, 1.5e6};
    cancel.phases_rad = {0.0, kPi};
    try {
      estimate_freq_response(cancel.analytic_waveform(), cancel);
      FAIL("expected degenerate probe");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_probe);
    }
  }

  TEST_CASE("Walsh training rows are orthogonal") {
    CHECK(make_walsh_training(1, 1) == WalshMatrix{{1}});
    for (auto [k1, n] : {std::pair{2, 4}, std::pair{4, 4}, std::pair{4, 8}, std::pair{1, 2}}) {
      const auto w = make_walsh_training(k1, n);
      REQUIRE(w.size() == static_cast<std::size_t>(k1));
      for (int a = 0; a < k1; ++a)
        for (int b = 0; b < k1; ++b) {
          int dot = 0;
          for (int t = 0; t < n; ++t) {
            CHECK(std::abs(w[a][t]) == 1);
            dot += w[a][t] * w[b][t];
          }
          CHECK(dot == (a == b ? n : 0));
        }
    }
    CHECK_THROWS_AS(make_walsh_training(2, 3), Error);
    CHECK_THROWS_AS(make_walsh_training(4, 2), Error);
  }

  TEST_CASE("OFDM layout") {
    const OfdmConfig cfg;
    CHECK(cfg.sample_rate_hz() == doctest::Approx(20e6));
    CHECK(cfg.cp_samples() == 16);
    CHECK(cfg.symbol_samples() == 80);
    for (int s : {-32, -31, 0, 31}) CHECK(cfg.is_null(s));
    CHECK(!cfg.is_null(1));
    CHECK(cfg.fft_bin(-1) == 63);
    CHECK(cfg.null_grid_bins() == std::vector<int>{0, 1, 32, 63});
    CHECK(std::abs(cfg.pilot(5)) == 1.0);
  }

  TEST_CASE("Moose estimator on the long preamble field") {
    const OfdmConfig ofdm;
    const PreambleConfig pre;
    const double fs = ofdm.sample_rate_hz();
    const auto p = make_preamble(pre, ofdm);
    const std::size_t ts = pre.short_total(fs);
    const CVec lf(p.begin() + ts, p.end());
    CHECK(std::abs(moose_cfo_estimate(lf, 64, fs)) < 1e-9);

    CVec rot(lf);
    for (std::size_t n = 0; n < rot.size(); ++n) rot[n] *= std::polar(1.0, oracle::kTwoPi * 1000.0 * n / fs);
    CHECK(std::abs(moose_cfo_estimate(rot, 64, fs) - 1000.0) < 1e-6 * 1000.0);
    CHECK_THROWS_AS(moose_cfo_estimate(CVec(100, 1.0), 64, fs), Error);
    try {
      moose_cfo_estimate(CVec(200), 64, fs);
      FAIL("expected degenerate input");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_input);
    }
  }

  TEST_CASE("frame sync") {
    const OfdmConfig ofdm;
    const PreambleConfig pre;
    const double fs = ofdm.sample_rate_hz();
    const auto p = make_preamble(pre, ofdm);
    CVec padded(p);
    padded.resize(p.size() + 50);
    CHECK(frame_sync(padded, pre, fs) == 0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CVec rx(100);
      rx.insert(rx.end(), p.begin(), p.end());
      rx.resize(rx.size() + 100);
      const auto noisy = with_noise(rx, 20.0, seed);
      const auto at = static_cast<long>(frame_sync(noisy, pre, fs));
      CHECK(std::abs(at - 100) <= 1);
    }

    std::mt19937_64 rng(3);
    const auto noise = oracle::random_cvec(rng, 800);
    try {
      frame_sync(noise, pre, fs);
      FAIL("expected sync failure");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::sync_failure);
    }
  }

  TEST_CASE("Walsh inversion recovers identity and diagonal channels") {
    const OfdmConfig cfg;
    const auto w = make_walsh_training(2, 4);
    const auto tx = ofdm_training_waveform(w, cfg);
    REQUIRE(tx.size() == 2);
    const auto eye = estimate_mimo_ofdm_channel(tx, w, cfg);
    CHECK(eye.entries.size() == 60);
    for (int s : {-32, -31, 0, 31}) CHECK(eye.find(s) == nullptr);
    for (const auto& e : eye.entries)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) CHECK(std::abs(eye.at(e.subcarrier, j, i) - (i == j ? 1.0 : 0.0)) < 1e-9);

    std::vector<CVec> rx{tx[0], tx[1]};
    for (auto& v : rx[0]) v *= 2.0;
    for (auto& v : rx[1]) v *= cplx{0.0, 1.0};
    const auto diag = estimate_mimo_ofdm_channel(rx, w, cfg);
    for (const auto& e : diag.entries) {
      CHECK(std::abs(diag.at(e.subcarrier, 0, 0) - 2.0) < 1e-9);
      CHECK(std::abs(diag.at(e.subcarrier, 1, 1) - cplx{0.0, 1.0}) < 1e-9);
      CHECK(std::abs(diag.at(e.subcarrier, 0, 1)) < 1e-9);
      CHECK(std::abs(diag.at(e.subcarrier, 1, 0)) < 1e-9);
    }
    CHECK_THROWS_AS(estimate_mimo_ofdm_channel(std::vector<CVec>{CVec(10)}, w, cfg), Error);
  }

  TEST_CASE("multitone sounding round trip and timing jitter") {
    MultipathChannel ch;
    ch.paths = {Path{40e-9, {0.6, -0.3}, 0.2, 1.0}};
    SoundingConfig cfg;
    const auto truth = truth_snapshot(ch, Vec2{}, cfg);
    const auto est = sound_snapshot(ch, Vec2{}, cfg, 0, 1);
    CHECK(est.M == 40);
    CHECK(est.sample_period_s == doctest::Approx(25e-9));
    CHECK(oracle::relative_error(est.taps[0], truth.taps[0]) < 1e-6);

    cfg.sync_jitter_samples = 1.0;
    const auto shifted = sound_snapshot(ch, Vec2{}, cfg, 0, 1);
    const cplx half_bin = std::polar(1.0, -kPi / 40.0);
    CVec want(40);
    for (int t = 0; t < 40; ++t) want[(t + 1) % 40] = truth.taps[0][t] * half_bin;
    CHECK(oracle::relative_error(shifted.taps[0], want) < 1e-6);

    cfg.snr_db = 20.0;
    CHECK(sound_snapshot(ch, Vec2{}, cfg, 0, 9) == sound_snapshot(ch, Vec2{}, cfg, 0, 9));
  }

  TEST_CASE("OFDM sounding round trip with a carrier offset") {
    const auto ch = make_random_channel(21, 24, 60e-9, 2.55e9, {ArrayKind::uniform_circular, 2, 0.5},
                                        {ArrayKind::uniform_circular, 2, 0.5});
    SoundingConfig cfg;
    cfg.method = SoundingMethod::ofdm;
    cfg.cfo_hz = 1500.0;
    const auto truth = truth_snapshot(ch, Vec2{}, cfg);
    const auto est = sound_snapshot(ch, Vec2{}, cfg, 0, 4);
    CHECK(est.M == 64);
    for (std::size_t p = 0; p < 4; ++p) CHECK(oracle::relative_error(est.taps[p], truth.taps[p]) < 1e-6);
  }

  TEST_CASE("narrower signature bandwidth keeps the first tones") {
    const auto ch = make_random_channel(4, 16, 60e-9, 2.55e9, ArrayGeometry{}, ArrayGeometry{});
    SoundingConfig cfg;
    const auto resp = sound_frequency_response(ch, Vec2{}, cfg, 1);
    const auto s10 = to_snapshot(resp, 0, Vec2{}, 10);
    CHECK(s10.M == 10);
    CHECK(s10.sample_period_s == doctest::Approx(100e-9));
    const auto want = snapshot_at(ch, Vec2{}, FrequencyGrid{10e6, 10, 0.5, {}});
    CHECK(oracle::relative_error(s10.taps[0], want.taps[0]) < 1e-6);
    CHECK_THROWS_AS(to_snapshot(resp, 0, Vec2{}, 41), Error);
  }
}
