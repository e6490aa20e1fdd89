#include "holosim/holarchy.hpp"

#include "holosim/error.hpp"

#include <algorithm>

namespace holosim {

namespace {

void collect_leaves(const holon& h, std::vector<agent_id>& out) {
    out.push_back(h.head);
    out.insert(out.end(), h.body.begin(), h.body.end());
    for (const auto& p : h.parts) collect_leaves(p, out);
}

bool contains(const std::vector<agent_id>& v, const agent_id& a) {
    return std::find(v.begin(), v.end(), a) != v.end();
}

} // namespace

std::vector<agent_id> holon::leaves() const {
    std::vector<agent_id> out;
    collect_leaves(*this, out);
    std::sort(out.begin(), out.end());
    return out;
}

favorite_graph build_favorite_graph(const event_trace& tr, tick t, long long k) {
    if (k <= 0) fail(errc::domain_error, "favorite count must be positive");

    struct view_state {
        best_table best;
        std::set<agent_id> dead;
        std::set<field_id> fields;
    };
    std::map<agent_id, view_state> view;
    for (const auto& e : tr.events) {
        if (e.t > t) break; // events are time ordered
        switch (e.kind) {
            case ev_kind::table:
                view[e.a].best.counts[{e.field, e.b}] = e.count;
                view[e.a].fields.insert(e.field);
                break;
            case ev_kind::timeout:
                view[e.a].dead.insert(e.b);
                break;
            case ev_kind::deliver:
                // an arriving answer proves the sender alive again
                if (e.detail == "response") view[e.b].dead.erase(e.a);
                break;
            default:
                break;
        }
    }

    favorite_graph g;
    const auto& external = view[omega_id()];
    for (const auto& p : tr.peers)
        if (!external.dead.count(p)) g.alive.insert(p);

    for (const auto& [who, st] : view) {
        agent_state chooser;
        chooser.id = who;
        chooser.best = st.best;
        chooser.known_exhausted = st.dead;
        for (const auto& f : st.fields) {
            auto sel = select_recipients(chooser, f, tr.peers, {});
            if (sel.empty() || static_cast<long long>(sel.size()) > k) continue;
            for (const auto& y : sel) g.edges[who].insert(y);
        }
    }
    return g;
}

std::vector<holon> detect_holons(const favorite_graph& g,
                                 const std::vector<holon>& prior, tick t) {
    std::vector<holon> out;

    // rule 1: one favorite gating the external querier roots the holon
    auto om = g.edges.find(omega_id());
    if (om != g.edges.end() && om->second.size() == 1) {
        const agent_id& head = *om->second.begin();
        if (g.alive.count(head)) {
            holon h;
            h.head = head;
            h.formed_at = t;
            for (const auto& p : g.alive)
                if (p != head) h.body.push_back(p);
            for (const auto& ph : prior)
                if (ph.head == head) h.formed_at = ph.formed_at;
            out.push_back(std::move(h));
        }
    }

    // candidate pool for mergers: current holons plus live prior ones.
    // carried priors only matter as rule-3 building blocks; they do not
    // survive on their own.
    struct pooled {
        holon h;
        bool carried = false;
    };
    std::vector<pooled> pool;
    for (auto& h : out) pool.push_back({std::move(h), false});
    out.clear();
    for (const auto& ph : prior) {
        if (!g.alive.count(ph.head)) continue;
        bool dup = false;
        for (const auto& p : pool) dup |= p.h.head == ph.head;
        if (!dup) pool.push_back({ph, true});
    }

    auto member_somewhere = [&pool](const agent_id& a) {
        for (const auto& p : pool)
            if (contains(p.h.leaves(), a)) return true;
        return false;
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // rule 2: members absorb live outsiders they favor
        for (auto& p : pool) {
            for (const auto& m : p.h.leaves()) {
                auto it = g.edges.find(m);
                if (it == g.edges.end()) continue;
                for (const auto& y : it->second) {
                    if (!g.alive.count(y) || member_somewhere(y)) continue;
                    p.h.body.push_back(y);
                    std::sort(p.h.body.begin(), p.h.body.end());
                    changed = true;
                    break;
                }
                if (changed) break;
            }
            if (changed) break;
        }
        if (changed) continue;

        // rule 3: an outside chooser favoring two heads merges their holons
        for (const auto& [who, targets] : g.edges) {
            if (who == omega_id()) continue;
            if (!g.alive.count(who) || member_somewhere(who)) continue;
            std::vector<std::size_t> chosen;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (targets.count(pool[i].h.head)) chosen.push_back(i);
            if (chosen.size() < 2) continue;

            holon merged;
            merged.head = who;
            merged.formed_at = t;
            merged.parts.push_back(pool[chosen[0]].h);
            merged.parts.push_back(pool[chosen[1]].h);
            pool.erase(pool.begin() + chosen[1]);
            pool.erase(pool.begin() + chosen[0]);
            pool.push_back({std::move(merged), false});
            changed = true;
            break;
        }
    }

    // survivors: everything rule 1 rooted this tick or rule 3 built; a prior
    // holon that merely sat in the pool does not persist by itself
    std::vector<holon> result;
    for (auto& p : pool)
        if (!p.carried) result.push_back(std::move(p.h));
    std::sort(result.begin(), result.end(),
              [](const holon& x, const holon& y) { return x.head < y.head; });
    return result;
}

std::vector<timeline_entry> holon_timeline(const event_trace& tr, long long k) {
    std::vector<timeline_entry> out;
    std::vector<holon> prev;
    for (tick t = 1; t <= tr.horizon; ++t) {
        auto g = build_favorite_graph(tr, t, k);
        auto cur = detect_holons(g, prev, t);

        for (const auto& h : cur) {
            bool existed = false;
            for (const auto& p : prev) existed |= p.head == h.head;
            if (!existed) out.push_back({t, true, h.head});
        }
        if (cur.empty()) {
            // only a fully emptied holarchy reads as dissolution; a head
            // replaced in the same tick is a handoff, not a collapse
            for (const auto& p : prev) out.push_back({t, false, p.head});
        }
        prev = std::move(cur);
    }
    return out;
}

double head_exclusivity(const event_trace& tr, const holon& h, tick lo, tick hi) {
    if (lo < 1 || hi < lo) fail(errc::out_of_range, "bad exclusivity window");

    bool has_detection_data = false;
    for (const auto& e : tr.events)
        if (e.t <= hi && e.kind == ev_kind::table) has_detection_data = true;

    if (has_detection_data) {
        std::vector<holon> prev;
        for (tick t = 1; t <= hi; ++t) {
            auto g = build_favorite_graph(tr, t, tr.k);
            auto cur = detect_holons(g, prev, t);
            if (t >= lo) {
                bool up = false;
                for (const auto& c : cur) up |= c.head == h.head;
                if (!up)
                    fail(errc::holon_inactive,
                         h.head + " heads no holon at tick " + std::to_string(t));
            }
            prev = std::move(cur);
        }
    }

    auto ls = h.leaves();
    std::set<agent_id> inside(ls.begin(), ls.end());
    long long boundary = 0, through_head = 0;
    for (const auto& e : tr.events) {
        if (e.t < lo || e.t > hi || e.kind != ev_kind::send) continue;
        bool from_in = inside.count(e.a) != 0;
        bool to_in = inside.count(e.b) != 0;
        if (from_in == to_in) continue; // internal or fully external
        ++boundary;
        const agent_id& gate = from_in ? e.a : e.b;
        if (gate == h.head) ++through_head;
    }
    if (boundary == 0) return 1.0; // vacuously perfect
    return static_cast<double>(through_head) / static_cast<double>(boundary);
}

} // namespace holosim
