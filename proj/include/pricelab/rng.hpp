#pragma once

#include <cstdint>
#include <random>

namespace pricelab {

// SplitMix64 finalizer, used to derive well-separated seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-replica seed derived from a master seed and a replica index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 1));
}

// Deterministic generator. std::mt19937_64 output is fully specified by the
// standard; doubles are produced by an explicit bit conversion instead of
// std::uniform_real_distribution, whose stream is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform draw in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool next_bool() { return (gen_() >> 63) != 0; }

  // Bernoulli(p) draw.
  bool next_below(double p) { return next_double() < p; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pricelab
