#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace embrec {

/// Deterministic randomness for parameter init, dataset splits, and epoch
/// shuffles.
///
/// The engine is std::mt19937_64 (Mersenne Twister 19937, 64-bit), whose
/// output sequence is fixed by the C++ standard. The uniform/index/shuffle
/// mappings are implemented here rather than with <random> distributions so
/// that results do not depend on standard-library internals: a seed produces
/// the same values on every conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [lo, hi). Uses the top 53 bits of one draw.
    double uniform(double lo, double hi) {
        const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + unit * (hi - lo);
    }

    /// Uniform integer in [0, n). Rejection sampling, exactly uniform.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return static_cast<std::size_t>(r % bound);
            }
        }
    }

    /// Fisher-Yates shuffle driven by index().
    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace embrec
