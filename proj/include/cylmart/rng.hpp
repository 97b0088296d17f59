#pragma once

#include <cmath>
#include <cstdint>

namespace cylmart {

// 64-bit avalanche (splitmix64 finalizer). Bijective, so distinct counter
// values under one key never collide.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Identifies one reproducible random stream. Equal (seed, stream) pairs give
// bitwise-identical draw sequences; substreams are decorrelated by hashing.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    // Derived stream for trial/component i. Deterministic, order-free:
    // trials may run in parallel without sharing state.
    RngSeed substream(std::uint64_t i) const {
        return RngSeed{seed, mix64(stream ^ (0x9E3779B97F4A7C15ULL * (i + 1)))};
    }
};

// Counter-mode generator: draw k is a pure function of (seed, stream, k).
// No hidden global state; streams split without order dependence.
class CounterRng {
public:
    explicit CounterRng(RngSeed s)
        : key_(mix64(mix64(s.seed + 0x9E3779B97F4A7C15ULL) ^
                     mix64(s.stream + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next_u64() {
        return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++ctr_);
    }

    // Uniform on the open interval (0,1); safe for log().
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (libstdc++'s normal_distribution is
    // implementation-defined, which would break bitwise reproducibility).
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cylmart
