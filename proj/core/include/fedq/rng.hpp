#pragma once

#include <cstdint>
#include <random>

namespace fedq {

// Deterministic random source. All draws go through hand-rolled mappings on
// top of mt19937_64 so that sequences are identical across platforms and
// standard-library versions (std::uniform_real_distribution and friends are
// implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  float uniform(float lo, float hi) {
    return lo + static_cast<float>(uniform01()) * (hi - lo);
  }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  int64_t uniform_int(int64_t n);

  // Standard normal via Box-Muller (cosine branch). Two u64 per draw.
  double normal();

  // Derives an independent stream seed from (base, a, b); used for
  // per-(client, round) streams.
  static uint64_t derive_stream(uint64_t base, uint64_t a, uint64_t b);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedq
