#include "locdist/cir.hpp"

#include <string>

#include "locdist/dft.hpp"
#include "locdist/error.hpp"

namespace locdist {

CVec freq_to_cir(std::span<const cplx> bins, int taps, std::span<const int> null_bins) {
  require(bins.size() >= 2, Errc::invalid_argument, "freq_to_cir needs at least 2 bins");
  require(taps >= static_cast<int>(bins.size()), Errc::invalid_argument,
          "freq_to_cir: " + std::to_string(bins.size()) + " bins do not fit in " + std::to_string(taps) + " taps");
  CVec padded(static_cast<std::size_t>(taps), cplx{});
  std::copy(bins.begin(), bins.end(), padded.begin());
  for (int k : null_bins) {
    require(k >= 0 && k < static_cast<int>(bins.size()), Errc::invalid_argument,
            "null bin " + std::to_string(k) + " out of range");
    padded[static_cast<std::size_t>(k)] = cplx{};
  }
  return dsp::ifft(padded);
}

CVec cir_to_freq(std::span<const cplx> taps) { return dsp::fft(taps); }

}  // namespace locdist
