#include "holosim/engine.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace {

using namespace holosim;

template <class F>
errc thrown_kind(F&& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.kind;
    }
    FAIL("expected an error");
    return errc::io_error;
}

const event_trace& reference_trace() {
    static const event_trace tr = run(paper_example());
    return tr;
}

long long count_kind(const event_trace& tr, ev_kind k) {
    long long n = 0;
    for (const auto& e : tr.events)
        if (e.kind == k) ++n;
    return n;
}

} // namespace

TEST_CASE("reference run reproduces the external-querier table evolution") {
    CHECK(csv_best0(reference_trace(), 1, 50) == golden_best0_csv());
}

TEST_CASE("reference run reproduces the remaining-budget evolution") {
    CHECK(csv_remaining(reference_trace(), 1, 50) == golden_remaining_csv());
}

TEST_CASE("reference run reproduces the per-peer best tables") {
    CHECK(csv_best(reference_trace(), 1, 50) == golden_best_csv());
}

TEST_CASE("projection spot checks") {
    const auto& tr = reference_trace();

    auto s6 = project_tables(tr, 6);
    CHECK(s6.best.at("alpha").count("A", "alpha") == 1);
    auto s5 = project_tables(tr, 5);
    CHECK(s5.best.at("alpha").count("A", "alpha") == 0);

    auto s18 = project_tables(tr, 18);
    CHECK(s18.best.at("alpha").count("C", "beta") == 1);

    auto s9 = project_tables(tr, 9);
    CHECK(s9.best.at("beta").count("B", "beta") == 1);
    CHECK(s9.remaining.at("alpha") == 8);
    CHECK(s9.remaining.at("beta") == 5);
    CHECK(s9.remaining.at("gamma") == 10);

    auto s10 = project_tables(tr, 10);
    CHECK(s10.best.at("beta").count("D", "beta") == 1);

    auto s14 = project_tables(tr, 14);
    CHECK(s14.best0.at("alpha") == 1);
    CHECK(s14.best0.at("beta") == 0);

    auto s34 = project_tables(tr, 34);
    CHECK(s34.remaining.at("alpha") == 0);
    auto s39 = project_tables(tr, 39);
    CHECK(s39.remaining.at("beta") == 0);
    auto end = project_tables(tr, 50);
    CHECK(end.remaining.at("gamma") == 7);
    CHECK(end.best0.at("alpha") == 6);
    CHECK(end.best0.at("beta") == 1);
    CHECK(end.best0.at("gamma") == 1);
}

TEST_CASE("reference trace structure") {
    const auto& tr = reference_trace();
    CHECK(tr.peers == std::vector<agent_id>{"alpha", "beta", "gamma"});
    CHECK(tr.horizon == 50);
    CHECK(tr.k == 1);

    CHECK(count_kind(tr, ev_kind::send) == 38);
    CHECK(count_kind(tr, ev_kind::deliver) == 38);
    CHECK(count_kind(tr, ev_kind::fusion) == 17);
    CHECK(count_kind(tr, ev_kind::decline) == 12);
    CHECK(count_kind(tr, ev_kind::timeout) == 3);
    CHECK(count_kind(tr, ev_kind::mode) == 2);
    CHECK(count_kind(tr, ev_kind::hint) == 8);

    // the two mode switches: the external querier at 36, gamma at 47
    std::vector<std::pair<tick, agent_id>> modes;
    for (const auto& e : tr.events)
        if (e.kind == ev_kind::mode) modes.push_back({e.t, e.a});
    CHECK(modes == std::vector<std::pair<tick, agent_id>>{{36, "omega"}, {47, "gamma"}});

    // timeouts: alpha at 36 and 47, beta at 49
    std::vector<std::pair<tick, agent_id>> touts;
    for (const auto& e : tr.events)
        if (e.kind == ev_kind::timeout) touts.push_back({e.t, e.b});
    CHECK(touts == std::vector<std::pair<tick, agent_id>>{
                       {36, "alpha"}, {47, "alpha"}, {49, "beta"}});

    // events are time ordered within the horizon
    tick prev = 1;
    for (const auto& e : tr.events) {
        CHECK(e.t >= prev);
        CHECK(e.t <= 50);
        prev = e.t;
    }
}

TEST_CASE("decline reasons in the reference run") {
    const auto& tr = reference_trace();
    std::map<std::string, int> reasons;
    for (const auto& e : tr.events)
        if (e.kind == ev_kind::decline) reasons[e.detail] += 1;
    // nine refusals on quality grounds (worse-or-equal own error, e.g. the
    // two equal-error cases alpha->beta B at 8 and gamma->beta D at 10),
    // gamma's two scripted refusals, and beta's one low-budget lottery miss
    CHECK(reasons["quality"] == 9);
    CHECK(reasons["scripted"] == 2);
    CHECK(reasons["lottery"] == 1);
}

TEST_CASE("repeated runs are byte identical") {
    auto a = serialize_trace(run(paper_example()));
    auto b = serialize_trace(run(paper_example()));
    CHECK(a == b);
}

TEST_CASE("trace serialization round-trips") {
    auto text = serialize_trace(reference_trace());
    auto back = parse_trace(text);
    CHECK(serialize_trace(back) == text);
    CHECK(back.events.size() == reference_trace().events.size());
    CHECK(back.budgets.at("gamma") == 10);
}

TEST_CASE("trace parsing rejects malformed input") {
    CHECK(thrown_kind([] { parse_trace(""); }) == errc::parse_error);
    CHECK(thrown_kind([] { parse_trace("not json\n"); }) == errc::parse_error);
    CHECK(thrown_kind([] {
              parse_trace(R"({"ev":"meta","peers":["a"],"budgets":{"a":1},"horizon":5,"k":1})"
                          "\n"
                          R"({"ev":"wat"})"
                          "\n");
          }) == errc::parse_error);
}

TEST_CASE("world stepping honors the horizon") {
    auto w = init_world(paper_example());
    CHECK(w.clock == 0);
    for (tick t = 1; t <= 50; ++t) step(w);
    CHECK(w.clock == 50);
    CHECK(thrown_kind([&] { step(w); }) == errc::horizon_exceeded);
}

TEST_CASE("a zero horizon yields a meta-only trace") {
    auto scn = paper_example();
    sim_config cfg = scn.cfg;
    cfg.horizon = 0;
    auto tr = run(scn, cfg);
    CHECK(tr.events.empty());
    CHECK(tr.horizon == 0);
}

TEST_CASE("world digests separate diverging worlds") {
    auto w1 = init_world(paper_example());
    auto w2 = init_world(paper_example());
    CHECK(world_digest(w1) == world_digest(w2));
    for (int i = 0; i < 10; ++i) {
        step(w1);
        step(w2);
        CHECK(world_digest(w1) == world_digest(w2));
    }
    step(w1);
    CHECK(world_digest(w1) != world_digest(w2));
}

TEST_CASE("end-of-run budgets match the golden corner") {
    auto w = init_world(paper_example());
    for (tick t = 1; t <= 50; ++t) step(w);
    CHECK(w.agents.at("alpha").remaining_messages == 0);
    CHECK(w.agents.at("beta").remaining_messages == 0);
    CHECK(w.agents.at("gamma").remaining_messages == 7);
    CHECK(w.agents.at(omega_id()).unlimited_budget);
    // anything still flying lands after the horizon
    for (const auto& [mid, f] : w.in_flight) CHECK(f.deliver_at > 50);
}

TEST_CASE("uniform transit draws stay in bounds and replay by seed") {
    delay_dist d;
    d.lo = 2;
    d.hi = 5;
    rng r1(42), r2(42);
    std::set<long long> seen;
    for (int i = 0; i < 500; ++i) {
        auto v = draw_delay(r1, d);
        CHECK(v >= 2);
        CHECK(v <= 5);
        CHECK(v == draw_delay(r2, d));
        seen.insert(v);
    }
    CHECK(seen.size() == 4); // all values of the small range show up

    delay_dist s;
    s.kind = delay_kind::scripted;
    CHECK(thrown_kind([&] { draw_delay(r1, s); }) == errc::validation_error);
}

TEST_CASE("csv comparison pinpoints the first difference") {
    auto d0 = compare_csv("a,b\n1,2\n", "a,b\n1,2\n");
    CHECK(d0.ok);

    auto d1 = compare_csv("a,b\n1,2\n3,4\n", "a,b\n1,2\n3,5\n");
    CHECK_FALSE(d1.ok);
    CHECK(d1.line == 3);
    CHECK(d1.expected == "3,4");
    CHECK(d1.actual == "3,5");

    auto d2 = compare_csv("a,b\n1,2\n", "a,b\n");
    CHECK_FALSE(d2.ok);
    CHECK(d2.line == 2);
    CHECK(d2.actual == "<eof>");

    auto d3 = compare_csv("a,b\n", "a,b\n1,2\n");
    CHECK_FALSE(d3.ok);
    CHECK(d3.expected == "<eof>");
}

TEST_CASE("table export carries all three sections") {
    auto text = export_tables(reference_trace(), 1, 50);
    CHECK(text.find("[best0]\n") != std::string::npos);
    CHECK(text.find("[best]\n") != std::string::npos);
    CHECK(text.find("[remaining]\n") != std::string::npos);
    CHECK(text.find(golden_best0_csv()) != std::string::npos);
}

TEST_CASE("script mismatches are loud") {
    auto scn = paper_example();
    // drop alpha's first scripted answer: the first answered query now sees
    // the wrong head of the stream
    scn.scripts["alpha"].answers.erase(scn.scripts["alpha"].answers.begin());
    bool threw = false;
    try {
        run(scn);
    } catch (const error& e) {
        threw = true;
        CHECK((e.kind == errc::script_mismatch || e.kind == errc::script_exhausted));
    }
    CHECK(threw);
}
