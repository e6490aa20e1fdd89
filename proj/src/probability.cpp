#include "holosim/probability.hpp"

#include "holosim/error.hpp"
#include "holosim/rng.hpp"

#include <cmath>

namespace holosim {

namespace {

void need(bool ok, const std::string& what) {
    if (!ok) fail(errc::domain_error, what);
}

bigint ipow(bigint base, long long e) {
    return boost::multiprecision::pow(base, static_cast<unsigned>(e));
}

mc_result finish(long long hits, long long trials) {
    mc_result r;
    r.hits = hits;
    r.trials = trials;
    r.estimate = static_cast<double>(hits) / static_cast<double>(trials);
    r.stderr_ = std::sqrt(r.estimate * (1.0 - r.estimate) /
                          static_cast<double>(trials));
    return r;
}

// all `draws` picks from a pool of `size` land on the one marked peer
bool all_hit(rng& g, long long size, long long draws) {
    for (long long i = 0; i < draws; ++i)
        if (g.below(static_cast<std::uint64_t>(size)) != 0) return false;
    return true;
}

} // namespace

bigrat p_favorite(long long n, long long c) {
    need(n >= 2, "need at least two peers");
    need(c >= 1, "need at least one interaction");
    return bigrat(1, ipow(bigint(n - 1), c));
}

bigrat p_triple(long long n, long long c, long long k) {
    need(n >= 4, "need at least four peers");
    need(c >= 1 && k >= 1, "need positive interaction and favorite counts");
    bigint pools = bigint(n - 1) * (n - 2) * (n - 3);
    return bigrat(1, ipow(pools, c * k));
}

raw_bound p_any_triple(long long n, long long c, long long k) {
    raw_bound b;
    b.value = bigrat(bigint(n) * (n - 1) * (n - 2)) * p_triple(n, c, k);
    b.exceeds_one = b.value > 1;
    return b;
}

bound_pair p_bound(long long n, long long c, long long k) {
    need(n >= 4, "need at least four peers");
    need(c >= 1 && k >= 1, "need positive interaction and favorite counts");
    bound_pair b;
    b.middle = bigrat(bigint(n) * (n - 1) * (n - 2), ipow(bigint(n - 3), 3 * c * k));
    b.exponent = 3 * c * k - 3;
    b.approx = bigrat(1, ipow(bigint(n), b.exponent));
    b.approx_form = std::to_string(n) + "^-" + std::to_string(b.exponent);
    return b;
}

asymptotic_report asymptotic_check(long long c, long long k, long long n_lo,
                                   long long n_hi, const bigrat& eps) {
    need(n_lo >= 4, "range must start at four peers or more");
    need(n_hi >= n_lo, "empty range");
    asymptotic_report rep;
    rep.strictly_decreasing = true;
    bigrat prev;
    for (long long n = n_lo; n <= n_hi; ++n) {
        bigrat cur = p_any_triple(n, c, k).value;
        if (n > n_lo && cur >= prev) rep.strictly_decreasing = false;
        prev = cur;
    }
    rep.terminal = prev;
    rep.below_eps = prev < eps;
    rep.ok = rep.strictly_decreasing && rep.below_eps;
    return rep;
}

mc_result mc_favorite(long long n, long long c, long long trials,
                      std::uint64_t seed) {
    need(n >= 2, "need at least two peers");
    need(c >= 1, "need at least one interaction");
    need(trials >= 1, "need at least one trial");
    long long hits = 0;
    for (long long t = 0; t < trials; ++t) {
        rng g(derive_seed(seed, static_cast<std::uint64_t>(t)));
        if (all_hit(g, n - 1, c)) ++hits;
    }
    return finish(hits, trials);
}

mc_result mc_triple(long long n, long long c, long long k, long long trials,
                    std::uint64_t seed) {
    need(n >= 4, "need at least four peers");
    need(c >= 1 && k >= 1, "need positive interaction and favorite counts");
    need(trials >= 1, "need at least one trial");
    long long hits = 0;
    for (long long t = 0; t < trials; ++t) {
        rng g(derive_seed(seed, static_cast<std::uint64_t>(t)));
        bool ok = all_hit(g, n - 1, c * k) && all_hit(g, n - 2, c * k) &&
                  all_hit(g, n - 3, c * k);
        if (ok) ++hits;
    }
    return finish(hits, trials);
}

} // namespace holosim
