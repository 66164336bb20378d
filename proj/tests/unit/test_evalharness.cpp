#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "locdist/error.hpp"
#include "locdist/evalharness.hpp"

using namespace locdist;

namespace {

std::vector<DeltaSample> samples(std::vector<double> h0, std::vector<double> h1) {
  std::vector<DeltaSample> out;
  for (double v : h0) out.push_back({Hypothesis::h0, v, {}});
  for (double v : h1) out.push_back({Hypothesis::h1, v, {}});
  return out;
}

LinkSignature constant_sig(double v, std::int64_t n) {
  LinkSignature s;
  s.M = 2;
  s.meas_index = n;
  s.values = {v, v};
  return s;
}

SignatureTrace constant_trace(std::size_t len, double before, double after, std::optional<std::size_t> move) {
  SignatureTrace t;
  for (std::size_t i = 0; i < len; ++i)
    t.signatures.push_back(constant_sig(move && i >= *move ? after : before, static_cast<std::int64_t>(i)));
  t.move_index = move;
  return t;
}

Scenario small_scenario() {
  Scenario s = standard_scenario();
  s.trials = 20;
  s.h0_decisions_per_trial = 3;
  return s;
}

}  // namespace

TEST_SUITE("evalharness") {
  TEST_CASE("collect_deltas labels and counts") {
    const DetectorConfig cfg{3, 1, 1.0, NormKind::l2, SigmaMode::paper};
    std::vector<SignatureTrace> h0{constant_trace(10, 1.0, 1.0, std::nullopt)};
    std::vector<SignatureTrace> none;
    const auto zeros = collect_deltas(h0, none, cfg);
    CHECK(zeros.size() == 6);
    for (const auto& s : zeros) {
      CHECK(s.hypothesis == Hypothesis::h0);
      CHECK(s.delta == 0.0);
    }

    std::vector<SignatureTrace> h0s, h1s;
    for (int i = 0; i < 100; ++i) {
      h0s.push_back(constant_trace(6, 1.0, 1.0, std::nullopt));
      h1s.push_back(constant_trace(8, 1.0, 3.0, 5));
    }
    const auto all = collect_deltas(h0s, h1s, cfg, "tag");
    std::size_t n1 = 0;
    for (const auto& s : all) {
      CHECK(s.config_tag == "tag");
      if (s.hypothesis == Hypothesis::h1) {
        ++n1;
        CHECK(s.delta == std::numeric_limits<double>::infinity());
      }
    }
    CHECK(n1 == 100);

    std::vector<SignatureTrace> short_h1{constant_trace(8, 1.0, 3.0, 2)};
    try {
      collect_deltas(h0s, short_h1, cfg);
      FAIL("expected trace-too-short");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::trace_too_short);
    }
    std::vector<SignatureTrace> short_h0{constant_trace(4, 1.0, 1.0, std::nullopt)};
    CHECK_THROWS_AS(collect_deltas(short_h0, none, cfg), Error);
  }

  TEST_CASE("roc endpoints, monotonicity and hand counts") {
    const auto pts = roc(samples({1.0, 2.0}, {1.5, 3.0}));
    REQUIRE(pts.size() == 6);
    CHECK(pts.front().gamma == -std::numeric_limits<double>::infinity());
    CHECK(pts.front().pfa == 1.0);
    CHECK(pts.front().pd == 1.0);
    CHECK(pts.back().gamma == std::numeric_limits<double>::infinity());
    CHECK(pts.back().pfa == 0.0);
    CHECK(pts.back().pd == 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      CHECK(pts[i].gamma > pts[i - 1].gamma);
      CHECK(pts[i].pfa <= pts[i - 1].pfa);
      CHECK(pts[i].pd <= pts[i - 1].pd);
    }
    for (const auto& p : pts) {
      CHECK(p.pm == 1.0 - p.pd);
      if (p.gamma == 2.0) {
        CHECK(p.pfa == 0.0);
        CHECK(p.pd == 0.5);
      }
    }
    try {
      roc(samples({1.0}, {}));
      FAIL("expected missing hypothesis");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::missing_hypothesis);
    }
  }

  TEST_CASE("separated and identical populations") {
    const auto sep = roc(samples({0.1, 0.2, 0.3}, {1.0, 2.0}));
    bool ideal = false;
    for (const auto& p : sep) ideal = ideal || (p.pfa == 0.0 && p.pd == 1.0);
    CHECK(ideal);
    CHECK(pm_at_pfa(sep, 0.01) == 0.0);

    std::vector<double> same;
    for (int i = 0; i < 1000; ++i) same.push_back(i * 0.001);
    const auto diag = roc(samples(same, same));
    for (const auto& p : diag) CHECK(p.pd == p.pfa);
    CHECK(pm_at_pfa(diag, 0.01) == doctest::Approx(0.99).epsilon(1e-3));
  }

  TEST_CASE("pm_at_pfa uses the best feasible step") {
    const std::vector<RocPoint> hand{{3.0, 0.0, 0.4, 0.6}, {2.0, 0.05, 0.8, 0.2}, {1.0, 1.0, 1.0, 0.0}};
    CHECK(pm_at_pfa(hand, 0.01) == doctest::Approx(0.6));
    CHECK(pm_at_pfa(hand, 0.05) == doctest::Approx(0.2));
    CHECK(pm_at_pfa(hand, 1.0) == 0.0);
    const std::vector<RocPoint> unreachable{{1.0, 0.5, 1.0, 0.0}};
    try {
      pm_at_pfa(unreachable, 0.01);
      FAIL("expected unreachable target");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unreachable_target);
    }
  }

  TEST_CASE("measurable miss-rate floor") {
    CHECK(measurable_pm(0.0, 500).pm == doctest::Approx(0.002));
    CHECK(measurable_pm(0.0, 500).at_floor);
    CHECK(!measurable_pm(0.01, 500).at_floor);
    CHECK(measurable_pm(0.01, 500).pm == 0.01);
  }

  TEST_CASE("power-law fit") {
    std::vector<std::pair<int, double>> exact;
    for (int k : {1, 4, 16, 64}) exact.emplace_back(k, 2.0 / k);
    const auto f = fit_power_law(exact);
    CHECK(f.b == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.residual < 1e-12);

    // Reported fit for measured data: b = 10^-1.44, m = 0.93.
    std::vector<std::pair<int, double>> reported;
    for (int k : {1, 4, 16, 64}) reported.emplace_back(k, std::pow(10.0, -1.44) / std::pow(k, 0.93));
    const auto g = fit_power_law(reported);
    CHECK(std::log10(g.b) == doctest::Approx(-1.44).epsilon(1e-12));
    CHECK(g.m == doctest::Approx(0.93).epsilon(1e-12));

    const std::vector<std::pair<int, double>> one{{4, 0.1}};
    CHECK_THROWS_AS(fit_power_law(one), Error);
    const std::vector<std::pair<int, double>> zero{{1, 0.1}, {4, 0.0}};
    CHECK_THROWS_AS(fit_power_law(zero), Error);
    const std::vector<std::pair<int, double>> flat_x{{4, 0.1}, {4, 0.2}};
    CHECK_THROWS_AS(fit_power_law(flat_x), Error);
  }

  TEST_CASE("sweep values map onto the scenario") {
    const Scenario base = standard_scenario();
    CHECK(apply_sweep_value(base, SweepKind::history, "15").detector.history_size == 15);
    CHECK(apply_sweep_value(base, SweepKind::delay, "120").detector.delay == 120);
    CHECK(apply_sweep_value(base, SweepKind::antennas, "16").antennas_tx == 4);
    CHECK(apply_sweep_value(base, SweepKind::bandwidth, "20").tones == 10);
    CHECK(apply_sweep_value(base, SweepKind::signature, "tls-l2").kind == SignatureKind::magnitude);
    for (auto [kind, value] : {std::pair{SweepKind::history, "2"}, std::pair{SweepKind::delay, "0"},
                               std::pair{SweepKind::antennas, "8"}, std::pair{SweepKind::antennas, "81"},
                               std::pair{SweepKind::bandwidth, "100"}, std::pair{SweepKind::bandwidth, "15"},
                               std::pair{SweepKind::signature, "tls-phi2"}, std::pair{SweepKind::history, "x"}}) {
      try {
        apply_sweep_value(base, kind, value);
        FAIL("expected invalid grid for " << value);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_grid);
      }
    }
    try {
      apply_sweep_value(base, SweepKind::history, "2");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("floor of 3") != std::string::npos);
    }
    CHECK_THROWS_AS(sweep(SweepKind::history, std::vector<std::string>{}, base, 1), Error);
  }

  TEST_CASE("scenario traces have the documented shape") {
    Scenario s = small_scenario();
    s.trials = 3;
    const auto jump = generate_traces(s, 5);
    REQUIRE(jump.h0.size() == 3);
    REQUIRE(jump.h1.size() == 3);
    CHECK(jump.h0[0].signatures.size() == static_cast<std::size_t>(warmup_steps(s.detector) + 3));
    CHECK(jump.h1[0].move_index == static_cast<std::size_t>(s.detector.delay + s.detector.history_size));
    CHECK(jump.h1[0].signatures[0].values.size() == 40);

    s.use_case = UseCase::moving;
    const auto moving = generate_traces(s, 5);
    CHECK(!moving.h1[0].move_index);
    CHECK(moving.h1[0].signatures.size() == static_cast<std::size_t>(warmup_steps(s.detector) + 4));
  }

  TEST_CASE("8x8 CTLS: moved receivers score higher on average") {
    Scenario s = small_scenario();
    s.antennas_tx = s.antennas_rx = 8;
    const auto r = evaluate_scenario(s, 3);
    double m0 = 0.0, m1 = 0.0;
    for (const auto& x : r.samples) (x.hypothesis == Hypothesis::h0 ? m0 : m1) += x.delta;
    m0 /= static_cast<double>(r.h0_count);
    m1 /= static_cast<double>(r.h1_count);
    CHECK(r.h1_count == 20);
    CHECK(r.h0_count == 60);
    CHECK(m1 > m0);
  }

  TEST_CASE("sweeps are deterministic in the seed") {
    const std::vector<std::string> grid{"1", "4"};
    const auto a = sweep(SweepKind::antennas, grid, small_scenario(), 11);
    const auto b = sweep(SweepKind::antennas, grid, small_scenario(), 11);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].pm.pm == b[i].pm.pm);
      REQUIRE(a[i].roc.size() == b[i].roc.size());
      for (std::size_t k = 0; k < a[i].roc.size(); ++k) CHECK(a[i].roc[k].gamma == b[i].roc[k].gamma);
    }
  }

  TEST_CASE("distance at zero separation is zero") {
    ChannelSpec spec;
    spec.tx_array.element_count = 2;
    spec.rx_array.element_count = 2;
    const std::vector<double> seps{0.0, 0.05};
    const auto curve = avg_distance_vs_separation(spec, FrequencyGrid{40e6, 40, 0.5, {}}, seps, NormKind::l2, 5, 1);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].second == 0.0);
    CHECK(curve[1].second > 0.0);
  }

  TEST_CASE("parallel_for visits each index once and rethrows") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
  }
}
