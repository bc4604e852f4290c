#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace distinctbo {

// Seeded generator with platform-stable draws. The standard distributions are
// implementation-defined, so uniform and normal variates are derived directly
// from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; no cached second variate.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent stream identified by (base, stream name, index).
// Every random draw in a session comes from a stream derived this way, so a
// session restored from disk replays exactly.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index = 0);

}  // namespace distinctbo
