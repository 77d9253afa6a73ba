#pragma once

#include <cstdint>
#include <random>

#include "hmcmix/error.hpp"

namespace hmcmix {

/// SplitMix64 finalizer; used to turn (seed, stream) pairs into
/// decorrelated 64-bit seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream `index` derived from `base`: base ^ mix64(index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Per-chain random stream. Every draw a chain makes goes through one of
/// these, in a fixed order per iteration (see samplers.hpp).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  void fill_normal(Vector& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
  }
  Vector normal_vector(Eigen::Index d) {
    Vector v(d);
    fill_normal(v);
    return v;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hmcmix
