#pragma once

#include <cstdint>

namespace holosim {

// splitmix64: tiny, fast, and bit-stable across platforms, which the
// golden traces depend on. std streams + distributions are not portable.
struct rng {
    std::uint64_t state = 0;

    explicit rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n), n >= 1; widening multiply avoids modulo bias
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // uniform integer in [lo, hi] inclusive
    long long uniform_int(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }
};

// stateless mix for deriving independent child seeds (per run, per trial)
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    rng r(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return r.next();
}

} // namespace holosim
