#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace holosim {

// exact rational arithmetic throughout: the interesting values (20^-42 and
// friends) are far below where double relative error means anything
using bigrat = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

// chance one fixed peer ends up some agent's favorite after c independent
// uniform picks among its n-1 candidates
bigrat p_favorite(long long n, long long c);

// chance a fixed ordered triple keeps choosing each other across c*k picks;
// the three pools exclude self, the querier, and both
bigrat p_triple(long long n, long long c, long long k);

struct raw_bound {
    bigrat value;            // n(n-1)(n-2) * p_triple, reported raw
    bool exceeds_one = false; // a union-style bound, not a probability
};

raw_bound p_any_triple(long long n, long long c, long long k);

struct bound_pair {
    bigrat middle;           // n(n-1)(n-2) / (n-3)^{3ck}
    bigrat approx;           // n^{-(3ck-3)}
    long long exponent = 0;  // 3ck - 3
    std::string approx_form; // e.g. "20^-42"
};

bound_pair p_bound(long long n, long long c, long long k);

struct asymptotic_report {
    bool strictly_decreasing = false; // over every consecutive pair in range
    bool below_eps = false;           // terminal value < eps
    bool ok = false;
    bigrat terminal;
};

asymptotic_report asymptotic_check(long long c, long long k, long long n_lo,
                                   long long n_hi, const bigrat& eps);

struct mc_result {
    double estimate = 0.0;
    double stderr_ = 0.0;
    long long hits = 0;
    long long trials = 0;
};

// trial-indexed seeding: trial i runs on its own generator derived from
// (seed, i), so any execution order gives identical results
mc_result mc_favorite(long long n, long long c, long long trials,
                      std::uint64_t seed);
mc_result mc_triple(long long n, long long c, long long k, long long trials,
                    std::uint64_t seed);

} // namespace holosim
