#pragma once

#include <cstdint>

namespace impedance {

// 64-bit linear congruential generator x <- a x + c (mod 2^64) with Knuth's
// MMIX constants; doubles come from the top 53 bits. Chosen so that benchmark
// point sets, and hence image counts, are reproducible across platforms.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed = 1) : state_(seed) {}
    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }
    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace impedance
