#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "locdist/types.hpp"

namespace locdist {

// Mixes a base seed with stream identifiers (trial index, antenna pair, ...)
// so that independent random streams never share state.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  double exponential(double mean);
  /// Circular complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace locdist
