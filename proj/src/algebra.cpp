#include "holosim/algebra.hpp"

#include "holosim/error.hpp"

#include <algorithm>
#include <set>

namespace holosim {

namespace {

constexpr long long state_cap = 1000000; // enumeration refusal threshold

void require(bool ok, errc k, const std::string& what) {
    if (!ok) fail(k, what);
}

} // namespace

bool operator==(const abstract_agent& a, const abstract_agent& b) {
    return a.ns == b.ns && a.np == b.np && a.na == b.na && a.phi == b.phi;
}

void validate_agent(const abstract_agent& a) {
    require(a.ns >= 1 && a.np >= 1 && a.na >= 1, errc::validation_error,
            "agent needs at least one state, percept and action");
    require(a.phi.size() == static_cast<std::size_t>(a.ns) * a.np,
            errc::validation_error, "activity table must cover every (state, percept)");
    for (const auto& [s, act] : a.phi)
        require(s >= 0 && s < a.ns && act >= 0 && act < a.na,
                errc::validation_error, "activity table entry out of range");
}

bool operator==(const holon_agent& a, const holon_agent& b) {
    return a.members == b.members;
}

holon_agent neutral() { return {}; }

holon_agent singleton(int member) {
    require(member >= 0, errc::validation_error, "negative member index");
    return {{member}};
}

holon_agent compose(const holon_agent& a, const holon_agent& b) {
    holon_agent out;
    out.members.reserve(a.members.size() + b.members.size());
    std::merge(a.members.begin(), a.members.end(), b.members.begin(),
               b.members.end(), std::back_inserter(out.members));
    for (std::size_t i = 1; i < out.members.size(); ++i)
        require(out.members[i - 1] != out.members[i], errc::overlapping_members,
                "member " + std::to_string(out.members[i]) + " on both sides");
    return out;
}

abstract_agent materialize(const std::vector<abstract_agent>& pool,
                           const holon_agent& h) {
    for (int m : h.members)
        require(m >= 0 && m < static_cast<int>(pool.size()), errc::out_of_range,
                "member index outside the pool");

    abstract_agent prod; // defaults are exactly the do-nothing agent
    if (h.members.empty()) {
        prod.phi = {{0, 0}};
        return prod;
    }

    long long ns = 1, np = 1, na = 1;
    for (int m : h.members) {
        ns *= pool[m].ns;
        np *= pool[m].np;
        na *= pool[m].na;
        require(ns <= state_cap && np <= state_cap && na <= state_cap,
                errc::state_space_too_large, "product automaton too large");
    }
    prod.ns = static_cast<int>(ns);
    prod.np = static_cast<int>(np);
    prod.na = static_cast<int>(na);
    prod.phi.resize(static_cast<std::size_t>(ns) * np);

    const std::size_t k = h.members.size();
    std::vector<int> s(k), p(k);
    for (long long si = 0; si < ns; ++si) {
        long long rs = si; // mixed radix, first member most significant
        for (std::size_t i = k; i-- > 0;) {
            s[i] = static_cast<int>(rs % pool[h.members[i]].ns);
            rs /= pool[h.members[i]].ns;
        }
        for (long long pi = 0; pi < np; ++pi) {
            long long rp = pi;
            for (std::size_t i = k; i-- > 0;) {
                p[i] = static_cast<int>(rp % pool[h.members[i]].np);
                rp /= pool[h.members[i]].np;
            }
            long long s2 = 0, a2 = 0;
            for (std::size_t i = 0; i < k; ++i) {
                const auto& ag = pool[h.members[i]];
                auto [sn, an] = ag.act(s[i], p[i]);
                s2 = s2 * ag.ns + sn;
                a2 = a2 * ag.na + an;
            }
            prod.phi[static_cast<std::size_t>(si) * np + pi] = {
                static_cast<int>(s2), static_cast<int>(a2)};
        }
    }
    return prod;
}

void validate_mas(const toy_mas& m) {
    require(m.ne >= 1, errc::validation_error, "need at least one env state");
    require(!m.agents.empty(), errc::validation_error, "need at least one agent");
    for (const auto& a : m.agents) validate_agent(a);

    long long joint = 1;
    for (const auto& a : m.agents) {
        joint *= a.na;
        require(joint <= state_cap, errc::state_space_too_large,
                "joint action space too large");
    }
    require(m.perceive.size() == static_cast<std::size_t>(m.ne),
            errc::validation_error, "perceive must cover every env state");
    require(m.delta.size() == static_cast<std::size_t>(m.ne),
            errc::validation_error, "delta must cover every env state");
    for (int e = 0; e < m.ne; ++e) {
        require(m.perceive[e].size() == m.agents.size(), errc::validation_error,
                "perceive row must give one percept per agent");
        for (std::size_t i = 0; i < m.agents.size(); ++i)
            require(m.perceive[e][i] >= 0 && m.perceive[e][i] < m.agents[i].np,
                    errc::validation_error, "percept out of range");
        require(m.delta[e].size() == static_cast<std::size_t>(joint),
                errc::validation_error, "delta row must cover every joint action");
        for (int x : m.delta[e])
            require(x >= 0 && x < m.ne, errc::validation_error,
                    "next env state out of range");
    }
}

long long count_global_states(const toy_mas& m) {
    long long n = m.ne;
    for (const auto& a : m.agents) {
        n *= a.ns;
        require(n <= state_cap, errc::state_space_too_large,
                "global state space exceeds " + std::to_string(state_cap));
    }
    return n;
}

long long encode_global(const toy_mas& m, int e, const std::vector<int>& s) {
    require(s.size() == m.agents.size(), errc::validation_error,
            "state tuple arity mismatch");
    long long g = e;
    for (std::size_t i = 0; i < s.size(); ++i) g = g * m.agents[i].ns + s[i];
    return g;
}

std::pair<int, std::vector<int>> decode_global(const toy_mas& m, long long g) {
    std::vector<int> s(m.agents.size());
    for (std::size_t i = m.agents.size(); i-- > 0;) {
        s[i] = static_cast<int>(g % m.agents[i].ns);
        g /= m.agents[i].ns;
    }
    return {static_cast<int>(g), std::move(s)};
}

std::pair<int, std::vector<int>> step_mas(const toy_mas& m, int e,
                                          const std::vector<int>& s) {
    std::vector<int> s2(s.size());
    long long joint = 0;
    for (std::size_t i = 0; i < m.agents.size(); ++i) {
        auto [sn, an] = m.agents[i].act(s[i], m.perceive[e][i]);
        s2[i] = sn;
        joint = joint * m.agents[i].na + an;
    }
    return {m.delta[e][joint], std::move(s2)};
}

collapse_result collapse_system(const toy_mas& m, const std::vector<int>& subset) {
    validate_mas(m);
    count_global_states(m); // enforces the enumeration cap

    std::vector<int> sub = subset;
    std::sort(sub.begin(), sub.end());
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    require(sub.size() == subset.size(), errc::validation_error,
            "duplicate member in subset");
    for (int i : sub)
        require(i >= 0 && i < static_cast<int>(m.agents.size()),
                errc::out_of_range, "subset index outside the system");

    collapse_result out;
    out.subset = sub;
    if (sub.empty()) { // identity collapse
        out.collapsed = m;
        long long n = count_global_states(m);
        out.psi.resize(static_cast<std::size_t>(n));
        for (long long g = 0; g < n; ++g) out.psi[g] = g;
        return out;
    }

    std::set<int> in_sub(sub.begin(), sub.end());
    std::vector<int> rest;
    for (int i = 0; i < static_cast<int>(m.agents.size()); ++i)
        if (!in_sub.count(i)) rest.push_back(i);

    holon_agent h;
    h.members = sub;

    toy_mas c;
    c.ne = m.ne;
    c.agents.push_back(materialize(m.agents, h));
    for (int i : rest) c.agents.push_back(m.agents[i]);

    // new agent order, as indices into the old system; slot 0 carries the
    // whole fused block
    c.perceive.resize(c.ne);
    c.delta.resize(c.ne);
    for (int e = 0; e < m.ne; ++e) {
        auto& row = c.perceive[e];
        long long fused_p = 0;
        for (int i : sub) fused_p = fused_p * m.agents[i].np + m.perceive[e][i];
        row.push_back(static_cast<int>(fused_p));
        for (int i : rest) row.push_back(m.perceive[e][i]);

        // every joint action of the collapsed system maps to one of the
        // original system by splitting slot 0 back into its factors
        long long cjoint = 1;
        for (const auto& a : c.agents) cjoint *= a.na;
        c.delta[e].resize(static_cast<std::size_t>(cjoint));
        std::vector<int> act(m.agents.size());
        for (long long j = 0; j < cjoint; ++j) {
            long long rj = j;
            for (std::size_t slot = c.agents.size(); slot-- > 1;) {
                act[rest[slot - 1]] = static_cast<int>(rj % c.agents[slot].na);
                rj /= c.agents[slot].na;
            }
            for (std::size_t i = sub.size(); i-- > 0;) {
                act[sub[i]] = static_cast<int>(rj % m.agents[sub[i]].na);
                rj /= m.agents[sub[i]].na;
            }
            long long old_j = 0;
            for (std::size_t i = 0; i < m.agents.size(); ++i)
                old_j = old_j * m.agents[i].na + act[i];
            c.delta[e][j] = m.delta[e][old_j];
        }
    }

    // psi: same env, agent states regrouped (fused block first, rest in order)
    long long n = count_global_states(m);
    out.psi.resize(static_cast<std::size_t>(n));
    for (long long g = 0; g < n; ++g) {
        auto [e, s] = decode_global(m, g);
        std::vector<int> s2;
        long long fused_s = 0;
        for (int i : sub) fused_s = fused_s * m.agents[i].ns + s[i];
        s2.push_back(static_cast<int>(fused_s));
        for (int i : rest) s2.push_back(s[i]);
        out.psi[g] = encode_global(c, e, s2);
    }
    out.collapsed = std::move(c);
    return out;
}

iso_report verify_isomorphism(const toy_mas& a, const toy_mas& b,
                              const std::vector<long long>& psi) {
    validate_mas(a);
    validate_mas(b);
    long long na = count_global_states(a);
    long long nb = count_global_states(b);

    iso_report rep;
    if (static_cast<long long>(psi.size()) != na || na != nb) {
        rep.ok = false;
        rep.detail = "psi is not a map between the two state spaces";
        return rep;
    }
    std::vector<char> hit(static_cast<std::size_t>(nb), 0);
    for (long long g = 0; g < na; ++g) {
        if (psi[g] < 0 || psi[g] >= nb || hit[psi[g]]) {
            rep.ok = false;
            rep.state = g;
            rep.detail = "psi is not a bijection";
            return rep;
        }
        hit[psi[g]] = 1;
    }

    for (long long g = 0; g < na; ++g) {
        auto [e, s] = decode_global(a, g);
        auto [e2, s2] = step_mas(a, e, s);
        long long via_a = psi[encode_global(a, e2, s2)];

        auto [f, t] = decode_global(b, psi[g]);
        auto [f2, t2] = step_mas(b, f, t);
        long long via_b = encode_global(b, f2, t2);

        if (via_a != via_b) {
            rep.ok = false;
            rep.state = g;
            rep.detail = "square broken at global state " + std::to_string(g) +
                         ": " + std::to_string(via_a) + " vs " +
                         std::to_string(via_b);
            return rep;
        }
    }
    return rep;
}

abstract_agent random_agent(rng& r, int max_states, int max_percepts,
                            int max_actions) {
    abstract_agent a;
    a.ns = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_states)));
    a.np = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_percepts)));
    a.na = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_actions)));
    a.phi.resize(static_cast<std::size_t>(a.ns) * a.np);
    for (auto& cell : a.phi)
        cell = {static_cast<int>(r.below(static_cast<std::uint64_t>(a.ns))),
                static_cast<int>(r.below(static_cast<std::uint64_t>(a.na)))};
    return a;
}

toy_mas random_mas(rng& r, int max_agents, int max_states, int max_env) {
    toy_mas m;
    m.ne = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_env)));
    int n = 1 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_agents)));
    for (int i = 0; i < n; ++i)
        m.agents.push_back(random_agent(r, max_states, max_states, max_states));

    long long joint = 1;
    for (const auto& a : m.agents) joint *= a.na;

    m.perceive.resize(m.ne);
    m.delta.resize(m.ne);
    for (int e = 0; e < m.ne; ++e) {
        for (const auto& a : m.agents)
            m.perceive[e].push_back(
                static_cast<int>(r.below(static_cast<std::uint64_t>(a.np))));
        for (long long j = 0; j < joint; ++j)
            m.delta[e].push_back(
                static_cast<int>(r.below(static_cast<std::uint64_t>(m.ne))));
    }
    return m;
}

} // namespace holosim
