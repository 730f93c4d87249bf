#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace nsqstab {

/// Counter-based generator: the state is a SplitMix64 walk keyed by
/// (seed, stream indices), so draws are reproducible and independent of
/// evaluation order across workers.
class KeyedRng {
public:
    explicit KeyedRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
        state_ = mix(seed ^ 0x9e3779b97f4a7c15ULL);
        for (std::uint64_t s : stream) state_ = mix(state_ ^ (s + 0xbf58476d1ce4e5b9ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace nsqstab
