#pragma once

#include <cstdint>
#include <string_view>

namespace sic {

// Deterministic splitmix64 generator. All randomness in the toolkit flows
// through this class so runs are reproducible across platforms; the standard
// <random> distributions are implementation-defined and are not used.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; draws two uniforms per call and keeps no
  // cached spare so the generator state alone captures the stream position.
  double normal();

  // Uniform integer in [0, n). Multiply-shift mapping, deterministic.
  int uniform_int(int n);

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

// Derives the seed of a named sub-stream from a master seed. Distinct labels
// give statistically independent streams, so adding or removing one consumer
// never shifts the draws seen by another.
uint64_t derive_stream(uint64_t master_seed, std::string_view label);

}  // namespace sic
