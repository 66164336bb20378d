#pragma once

#include <span>

#include "locdist/types.hpp"

namespace locdist {

/// Band-limited impulse response from uniformly spaced frequency bins.
///
/// Bins listed in `null_bins` are zero-filled, the sequence is zero-padded to
/// `taps` entries and inverse transformed with a 1/taps scale, so `taps` flat
/// unit bins map to a unit impulse at tap 0. Requires 2 <= bins.size() <= taps.
CVec freq_to_cir(std::span<const cplx> bins, int taps, std::span<const int> null_bins = {});

/// Inverse of freq_to_cir for the unpadded case: forward DFT of the taps.
CVec cir_to_freq(std::span<const cplx> taps);

}  // namespace locdist
