#pragma once

#include <vector>

#include "locdist/sounder.hpp"

namespace locdist::detail {

// One periodic preamble field: `total` samples of a signal with period
// `period`, phased so the field ends on a period boundary.
struct PeriodicField {
  int period = 0;
  int total = 0;
  CVec spectrum;                 ///< per FFT bin of the period, zero on nulls
  std::vector<double> freqs_hz;  ///< signed frequency of each bin
  double scale = 1.0;            ///< unit mean power through an identity channel
};

std::vector<PeriodicField> preamble_fields(const PreambleConfig& preamble, const OfdmConfig& ofdm);

/// Field as seen through a channel with the given response at freqs_hz.
CVec render_field(const PeriodicField& field, std::span<const cplx> response);

}  // namespace locdist::detail
