#include <benchmark/benchmark.h>

#include <random>

#include "locdist/chanmodel.hpp"
#include "locdist/dft.hpp"
#include "locdist/evalharness.hpp"
#include "locdist/sigmetric.hpp"
#include "locdist/sounder.hpp"

using namespace locdist;

namespace {

CVec random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

LinkSignature random_signature(std::size_t n, std::uint64_t seed) {
  LinkSignature s;
  s.M = static_cast<int>(n);
  s.values = random_vec(n, seed);
  return s;
}

void BM_fft(benchmark::State& state) {
  const auto x = random_vec(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::fft(x));
}
BENCHMARK(BM_fft)->Arg(40)->Arg(64)->Arg(512);

// Signature length of a k x k link at 40 taps.
void BM_phi2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_signature(n, 1), b = random_signature(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(phi2_dist(a, b));
}
BENCHMARK(BM_phi2)->Arg(40)->Arg(640)->Arg(2560);

void BM_delta(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SignatureHistory h(static_cast<std::size_t>(state.range(1)));
  for (int i = 0; i < state.range(1); ++i) h.push(random_signature(n, 10 + static_cast<std::uint64_t>(i)));
  const auto cur = random_signature(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(delta(cur, h, NormKind::phi2, SigmaMode::paper));
}
BENCHMARK(BM_delta)->Args({2560, 5})->Args({2560, 15});

void BM_snapshot_at(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const ChannelSpec spec{64, 100e-9, 2.55e9, {ArrayKind::uniform_circular, k, 0.5},
                         {ArrayKind::uniform_circular, k, 0.5}};
  const auto ch = spec.draw(7);
  const FrequencyGrid grid{40e6, 40, 0.5, {}};
  for (auto _ : state) benchmark::DoNotOptimize(snapshot_at(ch, Vec2{0.01, 0.0}, grid));
}
BENCHMARK(BM_snapshot_at)->Arg(1)->Arg(8);

void BM_sounding(benchmark::State& state) {
  const auto ch = ChannelSpec{}.draw(5);
  SoundingConfig cfg;
  cfg.method = state.range(0) == 0 ? SoundingMethod::multitone : SoundingMethod::ofdm;
  cfg.snr_db = 25.0;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sound_snapshot(ch, Vec2{}, cfg, 0, ++seed));
}
BENCHMARK(BM_sounding)->Arg(0)->Arg(1)->ArgNames({"method"});

}  // namespace

BENCHMARK_MAIN();
