#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "locdist/chanmodel.hpp"
#include "locdist/error.hpp"
#include "locdist/sigmetric.hpp"
#include "oracles.hpp"

using namespace locdist;

namespace {

LinkSignature sig(CVec v, SignatureKind kind = SignatureKind::complex) {
  LinkSignature s;
  s.kind = kind;
  s.M = static_cast<int>(v.size());
  s.values = std::move(v);
  return s;
}

SignatureHistory history_of(const std::vector<CVec>& entries) {
  SignatureHistory h(entries.size());
  for (const auto& e : entries) h.push(sig(e));
  return h;
}

}  // namespace

TEST_SUITE("sigmetric") {
  TEST_CASE("CTLS concatenates pairs row-major") {
    ChannelSnapshot s;
    s.k1 = 2;
    s.k2 = 2;
    s.M = 3;
    s.sample_period_s = 1e-8;
    for (int p = 0; p < 4; ++p) s.taps.push_back(CVec{double(10 * p), double(10 * p + 1), double(10 * p + 2)});
    const auto full = ctls_from_snapshot(s, 2, 2);
    CHECK(full.values.size() == 12);
    for (int p = 0; p < 4; ++p)
      for (int t = 0; t < 3; ++t) CHECK(full.values[p * 3 + t] == cplx(10 * p + t));
    const auto siso = ctls_from_snapshot(s, 1, 1);
    CHECK(siso.values == s.taps[0]);
    const auto row = ctls_from_snapshot(s, 2, 1);
    CHECK(row.values == CVec{0, 1, 2, 20, 21, 22});
    CHECK_THROWS_AS(ctls_from_snapshot(s, 3, 1), Error);

    ChannelSnapshot big;
    big.k1 = big.k2 = 8;
    big.M = 40;
    big.sample_period_s = 25e-9;
    big.taps.assign(64, CVec(40));
    CHECK(ctls_from_snapshot(big, 8, 8).values.size() == 2560);
  }

  TEST_CASE("TLS is the elementwise magnitude") {
    CHECK(tls_from_ctls(sig({1.0, -1.0, cplx{0.0, 1.0}})).values == CVec{1.0, 1.0, 1.0});
    CHECK(tls_from_ctls(sig(CVec(4))).values == CVec(4));
    CHECK(tls_from_ctls(sig({cplx{3.0, 4.0}})).values == CVec{5.0});
    CHECK(tls_from_ctls(sig({1.0})).kind == SignatureKind::magnitude);
  }

  TEST_CASE("l2 distance") {
    CHECK(l2_dist(sig({1.0, 2.0}), sig({1.0, 2.0})) == 0.0);
    CHECK(l2_dist(sig({1.0, 0.0}), sig({0.0, 1.0})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const auto a = oracle::random_cvec(rng, 50), b = oracle::random_cvec(rng, 50);
      CHECK(std::abs(l2_dist(sig(a), sig(b)) - oracle::l2(a, b)) < 1e-12);
    }
    CHECK_THROWS_AS(l2_dist(sig({1.0}), sig({1.0, 2.0})), Error);
    CHECK_THROWS_AS(l2_dist(sig({1.0}), sig({1.0}, SignatureKind::magnitude)), Error);
  }

  TEST_CASE("phi2 distance") {
    std::mt19937_64 rng(7);
    const auto a = oracle::random_cvec(rng, 30);
    for (double phi : {0.0, 0.3, 2.0, -3.1}) {
      CVec b(a);
      for (auto& v : b) v *= std::polar(1.0, phi);
      CHECK(phi2_dist(sig(a), sig(b)) < 1e-9);
    }
    CHECK(phi2_dist(sig({1.0, 0.0}), sig({0.0, 1.0})) == doctest::Approx(std::sqrt(2.0)));
    CHECK(oracle::phi2_direct({1.0, 0.0}, {0.0, 1.0}, 1000000) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    for (int i = 0; i < 10; ++i) {
      const auto x = oracle::random_cvec(rng, 8), y = oracle::random_cvec(rng, 8);
      const double d = phi2_dist(sig(x), sig(y));
      CHECK(std::abs(d - oracle::phi2_direct(x, y, 200000)) < 1e-6);
      CHECK(d <= l2_dist(sig(x), sig(y)) + 1e-12);
    }
    CHECK_THROWS_AS(phi2_dist(sig({1.0}, SignatureKind::magnitude), sig({1.0}, SignatureKind::magnitude)), Error);
  }

  TEST_CASE("distance properties") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
      const auto x = oracle::random_cvec(rng, 40), y = oracle::random_cvec(rng, 40);
      CHECK(phi2_dist(sig(x), sig(y)) == phi2_dist(sig(y), sig(x)));
      CVec r(x);
      for (auto& v : r) v *= std::polar(1.0, 0.1 * i);
      const auto t0 = tls_from_ctls(sig(x)), t1 = tls_from_ctls(sig(r));
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(t0.values[k] - t1.values[k]) < 1e-12);
    }

    // Growing the history can only shrink the un-normalized minimum distance.
    const auto cur = sig(oracle::random_cvec(rng, 12));
    for (auto norm : {NormKind::l2, NormKind::phi2}) {
      SignatureHistory h(20);
      double last = std::numeric_limits<double>::infinity();
      for (int n = 0; n < 20; ++n) {
        h.push(sig(oracle::random_cvec(rng, 12)));
        if (h.size() < 3) continue;
        const double min_term = delta(cur, h, norm, SigmaMode::mean_pairwise) * sigma(h, norm, SigmaMode::mean_pairwise);
        CHECK(min_term <= last * (1.0 + 1e-12));
        last = min_term;
      }
    }
  }

  TEST_CASE("history is a bounded FIFO") {
    SignatureHistory h(3);
    for (int i = 0; i < 5; ++i) {
      auto s = sig({double(i)});
      s.meas_index = i;
      h.push(s);
    }
    CHECK(h.size() == 3);
    CHECK(h[0].meas_index == 2);
    CHECK(h[2].meas_index == 4);
    CHECK_THROWS_AS(h.push(sig({1.0, 2.0})), Error);
    CHECK_THROWS_AS(SignatureHistory(0), Error);
  }

  TEST_CASE("sigma on a hand-enumerated history") {
    const auto h = history_of({{0.0}, {1.0}, {2.0}});
    CHECK(sigma(h, NormKind::l2, SigmaMode::paper) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sigma(h, NormKind::l2, SigmaMode::mean_pairwise) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(sigma(history_of({{1.0}, {1.0}, {1.0}}), NormKind::l2) == 0.0);
    try {
      sigma(history_of({{0.0}, {1.0}}), NormKind::l2);
      FAIL("expected insufficient history");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::insufficient_history);
    }
  }

  TEST_CASE("delta") {
    const auto h = history_of({{0.0}, {1.0}, {2.0}});
    CHECK(delta(sig({5.0}), h, NormKind::l2) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(delta(sig({1.0}), h, NormKind::l2) == 0.0);
    const auto flat = history_of({{1.0}, {1.0}, {1.0}});
    CHECK(delta(sig({2.0}), flat, NormKind::l2) == std::numeric_limits<double>::infinity());
    CHECK(delta(sig({1.0}), flat, NormKind::l2) == 0.0);

    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
      std::vector<CVec> entries;
      const std::size_t n = 3 + i % 6;
      for (std::size_t e = 0; e < n; ++e) entries.push_back(oracle::random_cvec(rng, 16));
      const auto cur = oracle::random_cvec(rng, 16);
      const auto hist = history_of(entries);
      for (auto [nk, on] : {std::pair{NormKind::l2, oracle::Norm::l2}, std::pair{NormKind::phi2, oracle::Norm::phi2}})
        for (auto [sm, os] : {std::pair{SigmaMode::paper, oracle::Sigma::paper},
                              std::pair{SigmaMode::mean_pairwise, oracle::Sigma::mean_pairwise}}) {
          const double want = oracle::delta(cur, entries, on, os);
          CHECK(std::abs(delta(sig(cur), hist, nk, sm) - want) <= 1e-12 * std::max(1.0, want));
        }
    }
  }
}
