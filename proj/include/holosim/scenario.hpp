#pragma once

#include "holosim/model.hpp"

namespace holosim {

// one externally injected query round. recipients are chosen at injection
// time by the live selection rule; `transits` (scripted mode) pair with the
// selected recipients in order. deadline is the absolute fusion cutoff; 0
// means first send + timeout_ticks.
struct omega_query {
    tick at = 0;
    field_id field;
    tick deadline = 0;
    std::vector<tick> transits;
};

// scripted per-agent streams, consumed strictly in order:
//   answers: one per answered query (offset from the decision tick + transit,
//            or a decline);
//   queries: one yes/no per still-unresolved compound component of each
//            delivered query;
//   subs:    one (offset, transit) per sub-query recipient actually sent to;
//   lottery: one draw whenever the remaining budget is under the lottery line.
struct answer_entry {
    field_id field;
    bool decline = false;
    tick offset = 0;
    tick transit = 0;
};

struct query_entry {
    field_id field;
    bool yes = false;
};

struct sub_entry {
    field_id field;
    agent_id to;
    tick offset = 0;
    tick transit = 0;
};

struct agent_script {
    std::vector<answer_entry> answers;
    std::vector<query_entry> queries;
    std::vector<sub_entry> subs;
    std::vector<bool> lottery;

    bool empty() const {
        return answers.empty() && queries.empty() && subs.empty() && lottery.empty();
    }
};

struct scenario {
    field_schema schema;
    std::vector<agent_profile> profiles; // peers, declaration order
    std::map<agent_id, long long> budgets;
    std::vector<omega_query> omega_queries;
    std::map<agent_id, agent_script> scripts;
    sim_config cfg;

    std::vector<agent_id> peer_ids() const;
    long long budget_for(const agent_id& a) const;
};

// errors: parse_error (with line number), validation_error
scenario parse_scenario(const std::string& text);

// semantic checks on an assembled scenario; throws validation_error
void validate_scenario(const scenario& s);

// canonical rendering; parse(render(s)) == s
std::string render_scenario(const scenario& s);

bool scenario_equal(const scenario& a, const scenario& b);

// the built-in reference scenario (three peers, scripted timing)
scenario paper_example();
const std::string& paper_example_text();

// embedded expected table evolutions for the reference scenario, csv with
// a header row and LF endings, rows t = 1..50
const std::string& golden_best0_csv();
const std::string& golden_remaining_csv();
const std::string& golden_best_csv();

// expected structure timeline for the reference scenario
struct timeline_entry {
    tick t = 0;
    bool emerged = false; // false = dissolved
    agent_id head;
};
std::vector<timeline_entry> golden_timeline();

} // namespace holosim
