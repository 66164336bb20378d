#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "locdist/error.hpp"
#include "locdist/evalharness.hpp"

namespace locdist {

std::string_view to_string(Hypothesis h) noexcept { return h == Hypothesis::h0 ? "H0" : "H1"; }

namespace {

void append_trace(const SignatureTrace& trace, Hypothesis h, const DetectorConfig& config, const std::string& tag,
                  std::vector<DeltaSample>& out) {
  const auto warm = static_cast<std::size_t>(warmup_steps(config));
  const std::size_t n = trace.signatures.size();
  if (trace.move_index) {
    const std::size_t m = *trace.move_index;
    require(m < n, Errc::invalid_argument, "move index " + std::to_string(m) + " is past the end of the trace");
    if (m < warm)
      fail(Errc::trace_too_short, "move at index " + std::to_string(m) + " falls inside the " + std::to_string(warm) +
                                      "-step warm-up");
    // Only the decision at the move is scored; later signatures are never needed.
    const auto decisions = run_trace(config, std::span(trace.signatures).first(m + 1));
    out.push_back({h, *decisions[m].delta, tag});
    return;
  }
  if (n <= warm)
    fail(Errc::trace_too_short,
         "trace of " + std::to_string(n) + " signatures never leaves the " + std::to_string(warm) + "-step warm-up");
  const auto decisions = run_trace(config, trace.signatures);
  for (std::size_t i = warm; i < n; ++i) out.push_back({h, *decisions[i].delta, tag});
}

}  // namespace

std::vector<DeltaSample> collect_deltas(std::span<const SignatureTrace> h0_traces,
                                        std::span<const SignatureTrace> h1_traces, const DetectorConfig& config,
                                        const std::string& config_tag) {
  config.validate();
  std::vector<DeltaSample> out;
  for (const auto& t : h0_traces) {
    SignatureTrace stationary{t.signatures, std::nullopt};
    append_trace(stationary, Hypothesis::h0, config, config_tag, out);
  }
  for (const auto& t : h1_traces) append_trace(t, Hypothesis::h1, config, config_tag, out);
  return out;
}

std::vector<RocPoint> roc(std::span<const DeltaSample> samples) {
  std::vector<double> h0, h1;
  for (const auto& s : samples) {
    require(!std::isnan(s.delta), Errc::invalid_argument, "delta sample is NaN");
    (s.hypothesis == Hypothesis::h0 ? h0 : h1).push_back(s.delta);
  }
  if (h0.empty() || h1.empty())
    fail(Errc::missing_hypothesis, std::string("no samples under ") + (h0.empty() ? "H0" : "H1"));
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> gammas;
  gammas.reserve(h0.size() + h1.size() + 2);
  gammas.push_back(-inf);
  gammas.insert(gammas.end(), h0.begin(), h0.end());
  gammas.insert(gammas.end(), h1.begin(), h1.end());
  gammas.push_back(inf);
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  auto fraction_above = [](const std::vector<double>& sorted, double g) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), g);
    return static_cast<double>(above) / static_cast<double>(sorted.size());
  };
  std::vector<RocPoint> points;
  points.reserve(gammas.size());
  for (double g : gammas) {
    RocPoint p;
    p.gamma = g;
    p.pfa = fraction_above(h0, g);
    p.pd = fraction_above(h1, g);
    p.pm = 1.0 - p.pd;
    points.push_back(p);
  }
  return points;
}

double pm_at_pfa(std::span<const RocPoint> points, double target_pfa) {
  require(!points.empty(), Errc::invalid_argument, "empty ROC");
  require(target_pfa >= 0.0 && target_pfa <= 1.0, Errc::invalid_argument, "target false-alarm rate outside [0, 1]");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points)
    if (p.pfa <= target_pfa) best = std::min(best, p.pm);
  if (std::isinf(best)) fail(Errc::unreachable_target, "no ROC point reaches pfa <= " + std::to_string(target_pfa));
  return best;
}

MissRate measurable_pm(double pm, std::size_t h1_count) {
  require(h1_count > 0, Errc::invalid_argument, "no H1 samples");
  const double floor = 1.0 / static_cast<double>(h1_count);
  if (pm < floor) return {floor, true};
  return {pm, false};
}

PowerLawFit fit_power_law(std::span<const std::pair<int, double>> points) {
  require(points.size() >= 2, Errc::invalid_argument, "power-law fit needs at least 2 points");
  std::vector<double> x, y;
  for (const auto& [k, pm] : points) {
    require(k >= 1, Errc::invalid_argument, "antenna-pair count must be positive");
    require(pm > 0.0 && std::isfinite(pm), Errc::invalid_argument,
            "miss rate must be positive to take its logarithm, got " + std::to_string(pm));
    x.push_back(std::log10(static_cast<double>(k)));
    y.push_back(std::log10(pm));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, Errc::invalid_argument, "power-law fit needs at least two distinct antenna-pair counts");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss += r * r;
  }
  return {std::pow(10.0, intercept), -slope, std::sqrt(ss / n)};
}

}  // namespace locdist
