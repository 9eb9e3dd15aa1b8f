#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace tiered {

// Seeded generator used everywhere in the library. Wraps std::mt19937_64
// (whose output sequence is fixed by the standard) and derives all variates
// through the helpers below, so identical seeds give identical streams on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps the
    // distribution exact.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(next_u64());  // full range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % range);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Index drawn according to `probs` (assumed nonnegative, summing to ~1).
    int categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    // Independent child stream; used to fan work out across threads.
    Rng fork(std::uint64_t stream) {
        std::uint64_t z = next_u64() ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tiered
