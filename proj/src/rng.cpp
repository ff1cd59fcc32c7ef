#include "sic/rng.hpp"

#include <cmath>

#include "sic/errors.hpp"

namespace sic {

double Rng::normal() {
  double u1 = 1.0 - uniform();  // in (0, 1], keeps the log finite
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw ParameterError("uniform_int: n must be positive");
  return static_cast<int>((static_cast<__uint128_t>(next_u64()) * static_cast<uint64_t>(n)) >> 64);
}

namespace {

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t derive_stream(uint64_t master_seed, std::string_view label) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a over the label bytes
  for (char c : label) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ULL;
  }
  uint64_t z = master_seed ^ (h + 0x9E3779B97F4A7C15ULL);
  return mix64(mix64(z) + h);
}

}  // namespace sic
