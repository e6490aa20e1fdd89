#pragma once

#include "holosim/engine.hpp"

namespace holosim {

// who each agent would pick today: edges chooser -> chosen favorite, kept
// only when the choice is decisive (non-empty tier no wider than K)
struct favorite_graph {
    std::map<agent_id, std::set<agent_id>> edges;
    std::set<agent_id> alive; // peers not timed out in the external view
};

favorite_graph build_favorite_graph(const event_trace& tr, tick t, long long k);

// head plus recursively nested body; leaves are distinct agents
struct holon {
    agent_id head;
    tick formed_at = 0;
    std::vector<agent_id> body; // atomic members, sorted
    std::vector<holon> parts;   // member holons from mergers

    std::vector<agent_id> leaves() const; // head + body + parts', sorted
};

// three formation rules to a deterministic fixpoint:
//   1. the external querier settling on a single favorite roots a holon:
//      that favorite is the gate and head, the other live peers the body;
//   2. a member choosing a live outsider as favorite absorbs it;
//   3. an outside agent favoring the heads of two holons merges them,
//      itself becoming the head.
// prior feeds rule 3 and keeps formed_at stable across ticks.
std::vector<holon> detect_holons(const favorite_graph& g,
                                 const std::vector<holon>& prior, tick t);

// per-tick detection diffed into emergence/dissolution moments. a head
// replaced in the same tick counts as one emergence, not a dissolution.
std::vector<timeline_entry> holon_timeline(const event_trace& tr, long long k);

// of the messages crossing the holon's boundary inside [lo, hi], the share
// whose inside endpoint is the head. no boundary traffic = 1.0. throws
// holon_inactive when detection data exists and the head isn't up throughout.
double head_exclusivity(const event_trace& tr, const holon& h, tick lo, tick hi);

} // namespace holosim
