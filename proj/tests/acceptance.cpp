// release gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// every check is self-contained and prints the measured values it judged.
#include "holosim/algebra.hpp"
#include "holosim/engine.hpp"
#include "holosim/holarchy.hpp"
#include "holosim/probability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace holosim;

struct outcome {
    bool ok = true;
    std::string detail;
};

std::string triple_of(const std::map<agent_id, long long>& row,
                      const std::vector<agent_id>& peers) {
    std::ostringstream o;
    o << '(';
    for (std::size_t i = 0; i < peers.size(); ++i)
        o << (i ? "," : "") << row.at(peers[i]);
    o << ')';
    return o.str();
}

const event_trace& reference_trace() {
    static const event_trace tr = run(paper_example());
    return tr;
}

// ---- golden table replays -------------------------------------------------

outcome golden_rows(const std::string& expected, const std::string& actual,
                    bool best0, const std::vector<std::pair<tick, std::string>>& spots) {
    auto diff = compare_csv(expected, actual);
    if (!diff.ok)
        return {false, "line " + std::to_string(diff.line) + ": expected '" +
                           diff.expected + "' got '" + diff.actual + "'"};
    const auto& tr = reference_trace();
    std::ostringstream d;
    d << "rows 1..50 exact;";
    for (const auto& [t, want] : spots) {
        auto snap = project_tables(tr, t);
        std::string got = triple_of(best0 ? snap.best0 : snap.remaining, tr.peers);
        if (got != want)
            return {false, "t=" + std::to_string(t) + " is " + got +
                               ", expected " + want};
        d << " t" << t << '=' << got;
    }
    return {true, d.str()};
}

outcome c1_best0() {
    return golden_rows(golden_best0_csv(), csv_best0(reference_trace(), 1, 50),
                       true,
                       {{14, "(1,0,0)"}, {34, "(6,0,0)"}, {46, "(6,1,0)"}, {50, "(6,1,1)"}});
}

outcome c2_remaining() {
    return golden_rows(golden_remaining_csv(),
                       csv_remaining(reference_trace(), 1, 50), false,
                       {{9, "(8,5,10)"}, {34, "(0,2,10)"}, {40, "(0,0,9)"}});
}

outcome c3_best_cells() {
    const auto& tr = reference_trace();
    auto diff = compare_csv(golden_best_csv(), csv_best(tr, 1, 50));
    if (!diff.ok)
        return {false, "line " + std::to_string(diff.line) + ": expected '" +
                           diff.expected + "' got '" + diff.actual + "'"};

    struct cell { agent_id owner; field_id f; agent_id who; tick from; };
    const cell cells[] = {{"alpha", "A", "alpha", 6},
                          {"alpha", "C", "beta", 18},
                          {"beta", "B", "beta", 9},
                          {"beta", "D", "beta", 10}};
    std::ostringstream d;
    d << "full table exact;";
    for (const auto& c : cells) {
        long long before = project_tables(tr, c.from - 1).best.at(c.owner).count(c.f, c.who);
        long long at = project_tables(tr, c.from).best.at(c.owner).count(c.f, c.who);
        long long end = project_tables(tr, 50).best.at(c.owner).count(c.f, c.who);
        if (before != 0 || at != 1 || end != 1)
            return {false, c.owner + "(" + c.f + "," + c.who + ") = " +
                               std::to_string(before) + "/" + std::to_string(at) +
                               "/" + std::to_string(end) + " at t=" +
                               std::to_string(c.from - 1) + "/" +
                               std::to_string(c.from) + "/50, expected 0/1/1"};
        d << ' ' << c.owner << "(" << c.f << "," << c.who << ")=1 from t" << c.from;
    }
    return {true, d.str()};
}

// ---- structure timeline ----------------------------------------------------

outcome c4_timeline() {
    auto got = holon_timeline(reference_trace(), 1);
    auto want = golden_timeline();
    auto show = [](const std::vector<timeline_entry>& v) {
        std::ostringstream o;
        for (const auto& e : v)
            o << (e.emerged ? " Emerged(" : " Dissolved(") << e.head << ")@" << e.t;
        return o.str();
    };
    const timeline_entry pinned[] = {{14, true, "alpha"},
                                     {36, false, "alpha"},
                                     {46, true, "beta"},
                                     {49, true, "gamma"}};
    bool ok = got.size() == 4 && want.size() == 4;
    for (std::size_t i = 0; ok && i < 4; ++i)
        ok = got[i].t == pinned[i].t && got[i].emerged == pinned[i].emerged &&
             got[i].head == pinned[i].head && want[i].t == pinned[i].t &&
             want[i].emerged == pinned[i].emerged && want[i].head == pinned[i].head;
    if (!ok) return {false, "measured:" + show(got)};
    return {true, show(got).substr(1)};
}

// ---- closed forms ----------------------------------------------------------

bigint tenpow(long long e) {
    bigint b = 1;
    for (long long i = 0; i < e; ++i) b *= 10;
    return b;
}

outcome c5_closed_forms() {
    auto triple = p_triple(5, 1, 1);
    if (triple != bigrat(1, 24)) {
        std::ostringstream o;
        o << "p_triple(5,1,1) = " << triple << ", expected 1/24";
        return {false, o.str()};
    }
    auto b = p_bound(20, 3, 5);
    if (b.exponent != 42 || b.approx_form != "20^-42" ||
        b.approx != bigrat(1, boost::multiprecision::pow(bigint(20), 42)))
        return {false, "bound form " + b.approx_form + " exponent " +
                           std::to_string(b.exponent) + ", expected 20^-42 / 42"};

    long long points = 0;
    for (long long n = 4; n <= 200; ++n)
        for (long long c = 1; c <= 5; ++c)
            for (long long k = 1; k <= 5; ++k) {
                if (p_any_triple(n, c, k).value > p_bound(n, c, k).middle)
                    return {false, "chain broken at N=" + std::to_string(n) +
                                       " C=" + std::to_string(c) +
                                       " K=" + std::to_string(k)};
                ++points;
            }
    return {true, "p_triple(5,1,1)=1/24 exact; bound prints 20^-42; chain holds at " +
                      std::to_string(points) + " grid points"};
}

// ---- monte carlo agreement --------------------------------------------------

outcome c6_monte_carlo() {
    const long long trials = 1000000;
    const std::uint64_t seed = 1;
    double worst = 0;
    std::ostringstream d;

    struct fav { long long n, c; };
    for (const fav f : {fav{5, 1}, fav{6, 2}, fav{10, 1}}) {
        double p = p_favorite(f.n, f.c).convert_to<double>();
        auto mc = mc_favorite(f.n, f.c, trials, seed);
        double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
        double dev = std::fabs(mc.estimate - p) / sigma;
        worst = std::max(worst, dev);
        if (dev > 3) {
            std::ostringstream o;
            o << "favorite(" << f.n << "," << f.c << ") estimate " << mc.estimate
              << " vs " << p << " = " << std::setprecision(3) << dev << " sigma";
            return {false, o.str()};
        }
    }
    double q = p_triple(5, 1, 1).convert_to<double>();
    auto mc = mc_triple(5, 1, 1, trials, seed);
    double sigma = std::sqrt(q * (1 - q) / static_cast<double>(trials));
    double dev = std::fabs(mc.estimate - q) / sigma;
    worst = std::max(worst, dev);
    if (dev > 3) {
        std::ostringstream o;
        o << "triple(5,1,1) estimate " << mc.estimate << " vs " << q << " = "
          << std::setprecision(3) << dev << " sigma";
        return {false, o.str()};
    }
    d << "4 estimates at 1e6 trials, worst deviation " << std::fixed
      << std::setprecision(2) << worst << " sigma";
    return {true, d.str()};
}

// ---- asymptotics plus boundary exclusivity -----------------------------------

holon holon_headed_at(const event_trace& tr, tick t, const agent_id& head) {
    auto g = build_favorite_graph(tr, t, 1);
    for (auto& h : detect_holons(g, {}, t))
        if (h.head == head) return h;
    fail(errc::holon_inactive, head + " heads nothing at t=" + std::to_string(t));
    return {};
}

outcome c7_asymptotics() {
    auto rep = asymptotic_check(1, 1, 10, 10000, bigrat(1, tenpow(6)));

    const auto& tr = reference_trace();
    struct window { agent_id head; tick lo, hi; };
    const window windows[] = {{"alpha", 14, 35}, {"beta", 46, 48}, {"gamma", 49, 50}};
    bool excl_ok = true;
    std::ostringstream we;
    for (const auto& w : windows) {
        double x = head_exclusivity(tr, holon_headed_at(tr, w.lo, w.head), w.lo, w.hi);
        excl_ok = excl_ok && x == 1.0;
        we << ' ' << w.head << '[' << w.lo << ',' << w.hi << "]=" << format_double(x);
    }

    std::ostringstream d;
    d << "decreasing over [10,10000]: " << (rep.strictly_decreasing ? "yes" : "NO")
      << "; terminal = " << rep.terminal << " ~ " << std::setprecision(9)
      << rep.terminal.convert_to<double>()
      << (rep.below_eps ? " < 1e-6" : ", NOT < 1e-6")
      << "; head exclusivity" << we.str();
    return {rep.ok && excl_ok, d.str()};
}

// ---- composition algebra ------------------------------------------------------

outcome c8_algebra() {
    rng r(88);
    holon_agent a, b, c;
    for (int trial = 0; trial < 120; ++trial) {
        a.members.clear();
        b.members.clear();
        c.members.clear();
        for (int m = 0; m < 24; ++m) {
            switch (r.below(4)) {
                case 0: a.members.push_back(m); break;
                case 1: b.members.push_back(m); break;
                case 2: c.members.push_back(m); break;
                default: break;
            }
        }
        bool laws = compose(compose(a, b), c) == compose(a, compose(b, c)) &&
                    compose(a, b) == compose(b, a) &&
                    compose(a, neutral()) == a && compose(neutral(), b) == b;
        if (!laws) return {false, "monoid law broken on tuple " + std::to_string(trial)};
    }

    auto bits_of = [](int mask) {
        std::vector<int> out;
        for (int i = 0; mask >> i; ++i)
            if (mask & (1 << i)) out.push_back(i);
        return out;
    };

    int lattices = 0;
    for (int trial = 0; trial < 120; ++trial) {
        auto m = random_mas(r, 3, 3, 3);
        int n = static_cast<int>(m.agents.size());
        for (int mask = 0; mask < (1 << n); ++mask) {
            auto res = collapse_system(m, bits_of(mask));
            auto rep = verify_isomorphism(m, res.collapsed, res.psi);
            if (!rep.ok)
                return {false, "system " + std::to_string(trial) + " subset " +
                                   std::to_string(mask) + ": " + rep.detail};
        }
        ++lattices;
    }

    int detected = 0;
    for (int trial = 0; trial < 100; ++trial) {
        toy_mas m;
        do {
            m = random_mas(r, 3, 3, 3);
        } while (m.ne < 2);
        int n = static_cast<int>(m.agents.size());
        int mask = 1 + static_cast<int>(r.below((1ULL << n) - 1));
        auto res = collapse_system(m, bits_of(mask));

        toy_mas bad = res.collapsed;
        auto [e, s] = decode_global(bad, res.psi[0]);
        long long joint = 0;
        for (std::size_t i = 0; i < bad.agents.size(); ++i) {
            auto [sn, an] = bad.agents[i].act(s[i], bad.perceive[e][i]);
            (void)sn;
            joint = joint * bad.agents[i].na + an;
        }
        bad.delta[e][joint] = (bad.delta[e][joint] + 1) % bad.ne;
        if (verify_isomorphism(m, bad, res.psi).ok)
            return {false, "corrupted transition went unnoticed on system " +
                               std::to_string(trial)};
        ++detected;
    }
    return {true, "monoid laws on 120 tuples; " + std::to_string(lattices) +
                      " systems x full subset lattice isomorphic; " +
                      std::to_string(detected) + "/100 corruptions detected"};
}

// ---- engine invariants over randomized scenarios -------------------------------

// random dependency layout, at most three compound levels above the leaves
field_schema random_schema(rng& r) {
    field_schema s;
    int nl = 2 + static_cast<int>(r.below(3));
    int nx = 1 + static_cast<int>(r.below(3));
    int ny = static_cast<int>(r.below(3));
    std::vector<field_id> leaves, xs, ys;
    for (int i = 0; i < nl; ++i) leaves.push_back("L" + std::to_string(i));
    for (int i = 0; i < nx; ++i) xs.push_back("X" + std::to_string(i));
    for (int i = 0; i < ny; ++i) ys.push_back("Y" + std::to_string(i));

    auto subset_of = [&r](const std::vector<field_id>& from) {
        std::vector<field_id> out;
        for (const auto& f : from)
            if (r.below(2) == 0) out.push_back(f);
        if (out.empty()) out.push_back(from[0]);
        return out;
    };

    for (const auto& x : xs) {
        s.fields.push_back(x);
        s.deps[x] = subset_of(leaves);
    }
    std::vector<field_id> below_y = xs;
    below_y.insert(below_y.end(), leaves.begin(), leaves.end());
    for (const auto& y : ys) {
        s.fields.push_back(y);
        s.deps[y] = subset_of(below_y);
    }
    s.fields.insert(s.fields.end(), leaves.begin(), leaves.end());
    s.deps[message_field()] = s.fields; // everything declared so far
    s.fields.push_back(message_field());
    return validate_schema(s);
}

scenario random_scenario(rng& r) {
    scenario s;
    s.schema = random_schema(r);
    auto compounds = compound_fields(s.schema);

    int n = 3 + static_cast<int>(r.below(8));
    for (int i = 0; i < n; ++i) {
        agent_profile p;
        p.agent = "p" + std::to_string(i);
        for (const auto& f : compounds) p.errors[f] = r.uniform01();
        s.profiles.push_back(std::move(p));
    }
    for (const auto& p : s.profiles)
        if (r.below(2) == 0)
            s.budgets[p.agent] = 2 + static_cast<long long>(r.below(12));

    tick at = 1 + static_cast<tick>(r.below(3));
    int q = 3 + static_cast<int>(r.below(4));
    for (int i = 0; i < q && at <= 25; ++i) {
        omega_query oq;
        oq.at = at;
        oq.field = r.below(2) == 0 ? message_field()
                                   : compounds[r.below(compounds.size())];
        s.omega_queries.push_back(std::move(oq));
        at += 2 + static_cast<tick>(r.below(5));
    }

    s.cfg.k = 1;
    s.cfg.c = 1;
    s.cfg.budget = 4 + static_cast<long long>(r.below(8));
    s.cfg.timeout_ticks = 3 + static_cast<long long>(r.below(4));
    s.cfg.horizon = 30;
    s.cfg.anneal_p0 = 0; // the strict response rule is only claimed unannealed
    s.cfg.seed = static_cast<long long>(r.next() & 0x7fffffffffffffffULL);
    s.cfg.delays.kind = delay_kind::uniform_int;
    s.cfg.delays.lo = 1;
    s.cfg.delays.hi = 1 + static_cast<long long>(r.below(3));
    validate_scenario(s);
    return s;
}

outcome c9_invariants() {
    rng master(4242);
    for (int i = 0; i < 50; ++i) {
        auto s = random_scenario(master);
        auto tr = run(s);
        auto text = serialize_trace(tr);
        if (serialize_trace(run(s)) != text)
            return {false, "case " + std::to_string(i) + ": repeated run diverged"};

        std::map<agent_id, const agent_profile*> prof;
        for (const auto& p : s.profiles) prof[p.agent] = &p;
        std::map<agent_id, long long> sends;
        for (const auto& e : tr.events) {
            if (e.kind != ev_kind::send) continue;
            ++sends[e.a];
            if (e.detail != "response") continue;
            double own = prof.at(e.a)->error_for(e.field);
            double ask = e.b == omega_id() ? 1.0 : prof.at(e.b)->error_for(e.field);
            if (!(own < ask))
                return {false, "case " + std::to_string(i) + ": " + e.a +
                                   " answered " + e.b + " on " + e.field +
                                   " with error " + format_double(own) +
                                   " >= " + format_double(ask)};
        }

        auto snap = project_tables(tr, tr.horizon);
        world_state w = init_world(s);
        while (w.clock < s.cfg.horizon) step(w);
        for (const auto& p : tr.peers) {
            long long spent = sends.count(p) ? sends.at(p) : 0;
            long long left = s.budget_for(p) - spent;
            if (left < 0 || snap.remaining.at(p) != left ||
                w.agents.at(p).remaining_messages != left)
                return {false, "case " + std::to_string(i) + ": " + p +
                                   " books disagree (budget " +
                                   std::to_string(s.budget_for(p)) + ", sent " +
                                   std::to_string(spent) + ", world " +
                                   std::to_string(w.agents.at(p).remaining_messages) +
                                   ", table " + std::to_string(snap.remaining.at(p)) + ")"};
        }

        // remaining-messages series never rises
        std::map<agent_id, long long> floor_;
        for (const auto& p : tr.peers) floor_[p] = s.budget_for(p);
        for (tick t = 1; t <= tr.horizon; ++t) {
            auto st = project_tables(tr, t);
            for (const auto& p : tr.peers) {
                if (st.remaining.at(p) > floor_[p])
                    return {false, "case " + std::to_string(i) + ": " + p +
                                       " regained budget at t=" + std::to_string(t)};
                floor_[p] = st.remaining.at(p);
            }
        }
    }
    return {true, "50 randomized scenarios: deterministic, budget books balance, "
                  "remaining never rises, responses strictly lower error"};
}

} // namespace

int main() {
    struct row {
        const char* name;
        outcome (*fn)();
        double budget; // seconds
    };
    const row rows[] = {
        {"golden replay, external table", c1_best0, 1.0},
        {"golden replay, remaining budgets", c2_remaining, 1.0},
        {"golden replay, per-peer tables", c3_best_cells, 1.0},
        {"structure timeline", c4_timeline, 1.0},
        {"closed forms and bound chain", c5_closed_forms, 5.0},
        {"monte carlo vs closed form", c6_monte_carlo, 30.0},
        {"vanishing bound and head exclusivity", c7_asymptotics, 10.0},
        {"composition algebra", c8_algebra, 60.0},
        {"engine invariants", c9_invariants, 60.0},
    };

    bool all = true;
    int idx = 0;
    for (const auto& r : rows) {
        ++idx;
        auto t0 = std::chrono::steady_clock::now();
        outcome o;
        try {
            o = r.fn();
        } catch (const error& e) {
            o = {false, std::string("unexpected error: ") + e.what()};
        } catch (const std::exception& e) {
            o = {false, std::string("unexpected exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool timely = secs <= r.budget;
        bool ok = o.ok && timely;
        all = all && ok;
        std::cout << "criterion " << idx << ", " << r.name << ": "
                  << (ok ? "PASS" : "FAIL") << " (" << std::fixed
                  << std::setprecision(2) << secs << "s) " << o.detail;
        if (!timely)
            std::cout << " [over the " << std::setprecision(0) << r.budget
                      << "s budget]";
        std::cout << '\n' << std::defaultfloat;
    }
    std::cout << (all ? "acceptance: all criteria passed"
                      : "acceptance: FAIL, see lines above")
              << std::endl;
    return all ? 0 : 1;
}
