#pragma once

#include <cstdint>
#include <random>

namespace mixkin {

// Deterministic generator with its own floating-point derivations so that
// sequences are identical across platforms and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal();

    // Marsaglia-Tsang; shape 0 yields exactly 0
    double gamma(double shape, double scale);

    // index in [0, n) proportional to nonnegative weights
    int categorical(const double* w, int n);

  private:
    std::mt19937_64 eng_;
};

// Stream splitting: hashes (base, stream) into an independent seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mixkin
