#pragma once

#include <cstdint>
#include <random>

namespace hpnn {

// Deterministic RNG used everywhere seeds appear. mt19937_64 output is
// fixed by the standard; the uniform mappings below avoid
// std::uniform_real_distribution, whose algorithm is
// implementation-defined, so streams are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::uint64_t index(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; n here is always << 2^64
    // by many orders, so the bias is far below double resolution.
    return gen_() % n;
  }

  bool coin() { return (gen_() & 1u) != 0; }

  std::uint64_t raw() { return gen_(); }

  // Independent child stream, e.g. one per trajectory or per layer.
  Rng child(std::uint64_t salt) {
    return Rng(gen_() ^ (salt * 0x9e3779b97f4a7c15ull));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hpnn
