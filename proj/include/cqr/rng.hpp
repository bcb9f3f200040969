#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cqr {

// Seeded random stream. The distributions are implemented here rather than
// taken from <random> so that a given seed yields the same draws on every
// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal, Box-Muller with a cached spare.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over bytes followed by a 64-bit finalizer. Stable across runs and
// platforms; used for split assignment and seed derivation.
std::uint64_t stable_hash64(std::string_view bytes);

// Seed for an independent named substream of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

}  // namespace cqr
