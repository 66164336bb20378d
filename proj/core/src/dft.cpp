#include "locdist/dft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "locdist/error.hpp"

namespace locdist::dsp {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans live for the lifetime of the process.
class PlanCache {
 public:
  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    CVec in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) fail(Errc::invalid_argument, "fftw: cannot plan transform of size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

CVec execute(std::span<const cplx> x, int sign) {
  CVec in(x.begin(), x.end());
  CVec out(x.size());
  if (x.empty()) return out;
  fftw_execute_dft(cache().get(x.size(), sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

CVec fft(std::span<const cplx> x) { return execute(x, FFTW_FORWARD); }

CVec ifft(std::span<const cplx> X) {
  CVec out = execute(X, FFTW_BACKWARD);
  const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

double bin_frequency(std::size_t k, std::size_t n, double sample_rate_hz) {
  const auto signed_k = (2 * k < n) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return signed_k * sample_rate_hz / static_cast<double>(n);
}

CVec circular_delay(std::span<const cplx> x, double delay_samples) {
  if (delay_samples == 0.0 || x.empty()) return CVec(x.begin(), x.end());
  CVec X = fft(x);
  const std::size_t n = X.size();
  for (std::size_t k = 0; k < n; ++k) {
    // The Nyquist bin of an even-length transform is rotated as a negative
    // frequency; integer delays are exact either way.
    const double f = bin_frequency(k, n, 1.0);
    X[k] *= std::polar(1.0, -2.0 * kPi * f * delay_samples);
  }
  return ifft(X);
}

}  // namespace locdist::dsp
