#pragma once

#include <span>

#include "locdist/types.hpp"

namespace locdist::dsp {

// Forward transform, X[k] = sum_n x[n] e^{-j 2 pi k n / N} (unscaled).
CVec fft(std::span<const cplx> x);

// Inverse transform scaled by 1/N, so ifft(fft(x)) == x.
CVec ifft(std::span<const cplx> X);

// Signed frequency of FFT bin k for an N-point transform at sample rate fs.
double bin_frequency(std::size_t k, std::size_t n, double sample_rate_hz);

// Circular delay by an arbitrary (fractional) number of samples, realized as a
// linear phase ramp over the signed FFT bins.
CVec circular_delay(std::span<const cplx> x, double delay_samples);

}  // namespace locdist::dsp
