#pragma once

#include "holosim/behavior.hpp"
#include "holosim/scenario.hpp"

namespace holosim {

// trace event kinds, one JSON line each in a serialized trace
enum class ev_kind { send, deliver, decline, timeout, fusion, table, mode, hint };

struct event {
    tick t = 0;
    ev_kind kind = ev_kind::send;
    agent_id a;           // sender / owner / switching agent
    agent_id b;           // recipient / target / winner / table column
    field_id field;
    long long mid = 0;    // message id, where one is involved
    long long round = 0;  // round id, where one is involved
    std::string detail;   // message kind, decline reason, or mode name
    double err = -1;      // response payload or fused error; < 0 = absent
    long long count = -1; // table events: the cell's new value
};

struct event_trace {
    std::vector<agent_id> peers;
    std::map<agent_id, long long> budgets;
    tick horizon = 0;
    long long k = 1;
    std::vector<event> events;
};

// JSON lines; first line is a meta record with peers/budgets/horizon/k
std::string serialize_trace(const event_trace& tr);
event_trace parse_trace(const std::string& text);

// --- simulation state ---------------------------------------------------

struct in_flight_msg {
    message msg;
    tick deliver_at = 0;
};

enum class leg_state { pending, responded, declined, timed_out };

// one open query round: the owner asked several peers about one field
struct round_state {
    long long id = 0;
    agent_id owner;
    field_id field;
    double own_error = 1.0;
    bool is_omega = false;
    std::vector<agent_id> chain; // owner lineage, self included; never re-queried
    std::map<agent_id, leg_state> legs;
    std::map<agent_id, long long> leg_mid;
    std::vector<std::pair<agent_id, double>> responses;
    long long outstanding = 0; // scheduled query sends not yet fired
    tick first_send = -1;
    tick deadline = -1; // absolute; -1 until the first send fixes it
    bool resolved = false;
};

struct pending_send {
    long long seq = 0; // schedule order; fire order within a tick
    tick fire_at = 0;
    msg_kind kind = msg_kind::query;
    agent_id sender;
    agent_id recipient;
    field_id field;
    long long parent_mid = 0; // responses: the query answered
    long long round = 0;
    tick transit = 0;
    double err = -1;
    std::vector<agent_id> chain;
};

struct script_cursor {
    std::size_t answers = 0, queries = 0, subs = 0, lottery = 0;
};

struct world_state {
    sim_config cfg;
    scenario scn;
    std::vector<agent_id> peers;
    tick clock = 0;
    std::map<agent_id, agent_state> agents; // peers + the external querier
    std::map<long long, in_flight_msg> in_flight;
    std::map<long long, round_state> rounds;
    std::vector<pending_send> sched;
    std::map<agent_id, script_cursor> cursors;
    event_trace trace;
    rng gen{1};
    long long next_mid = 1, next_round = 1, next_seq = 1;
};

world_state init_world(const scenario& scn);
world_state init_world(const scenario& scn, const sim_config& cfg);

// advance one tick: due sends fire, transit-done messages deliver, overdue
// rounds expire, externally scheduled queries inject. throws past the horizon.
void step(world_state& w);

event_trace run(const scenario& scn);
event_trace run(const scenario& scn, const sim_config& cfg);

// uniform transit draw; scripted timing comes from the scenario streams
long long draw_delay(rng& r, const delay_dist& d);

// one line per agent plus queue depths; equal digests = equal worlds
std::string world_digest(const world_state& w);

// --- projections over a finished trace -----------------------------------

struct table_snapshots {
    std::map<agent_id, long long> best0; // external querier's row, peer columns
    std::map<agent_id, best_table> best; // per-peer tables
    std::map<agent_id, long long> remaining;
};

// state of all tables after tick t (cumulative over events with .t <= t)
table_snapshots project_tables(const event_trace& tr, tick t);

// per-tick csv, header then one row per tick in [from, to]
std::string csv_best0(const event_trace& tr, tick from, tick to);
std::string csv_remaining(const event_trace& tr, tick from, tick to);
std::string csv_best(const event_trace& tr, tick from, tick to);

// all three sections concatenated under [best0] / [best] / [remaining]
std::string export_tables(const event_trace& tr, tick from, tick to);

struct csv_diff {
    bool ok = true;
    long long line = 0; // 1-based line of the first difference
    std::string expected, actual;
};
csv_diff compare_csv(const std::string& expected, const std::string& actual);

} // namespace holosim
