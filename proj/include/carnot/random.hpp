#pragma once

#include <cstdint>
#include <random>

namespace carnot {

/// Seeded uniform doubles built from the top 53 bits of mt19937_64, so draws
/// are identical across standard libraries (unlike std::uniform_real_distribution).
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : gen_(seed) {}
    double operator()(double lo, double hi) { return lo + (hi - lo) * (double(gen_() >> 11) * 0x1.0p-53); }

private:
    std::mt19937_64 gen_;
};

} // namespace carnot
