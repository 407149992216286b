#pragma once

#include <cstdint>
#include <random>

namespace survsynth {

// Seeded stream with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the distribution helpers below avoid the
// implementation-defined std:: distributions so that outputs are identical
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform integer in [0, n) by rejection (n > 0).
    std::uint64_t below(std::uint64_t n);

    double normal(double mean = 0.0, double sd = 1.0);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finaliser: decorrelates seeds derived as seed + offset.
std::uint64_t mix_seed(std::uint64_t seed);

} // namespace survsynth
