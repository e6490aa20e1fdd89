#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "holosim/error.hpp"

namespace holosim {

using field_id = std::string;
using agent_id = std::string;
using tick = long long;

// the external querier sits outside the peer set
inline const agent_id& omega_id() {
    static const agent_id id = "omega";
    return id;
}

// field set plus the dependency dag: a compound field is derived from others.
// the reserved whole-message field depends on every other declared field.
struct field_schema {
    std::vector<field_id> fields;                    // declaration order
    std::map<field_id, std::vector<field_id>> deps;  // f -> ordered components

    bool declared(const field_id& f) const;
    bool compound(const field_id& f) const;
    const std::vector<field_id>& components(const field_id& f) const;
};

inline const field_id& message_field() {
    static const field_id f = "M";
    return f;
}

// errors: cycle_detected (names the cycle), undeclared_field, validation_error
field_schema validate_schema(field_schema schema);

// compound fields in declaration order
std::vector<field_id> compound_fields(const field_schema& schema);

// quality = 1 - error; strictly decreasing, involutive
double quality(double err);

// shortest decimal text that round-trips the value (std::to_chars)
std::string format_double(double v);

// per-agent prediction error for each compound field
struct agent_profile {
    agent_id agent;
    std::map<field_id, double> errors;

    double error_for(const field_id& f) const;
};

enum class msg_kind { query, response, check_in, check_in_reply };

struct message {
    long long id = 0;
    msg_kind kind = msg_kind::query;
    field_id field;
    agent_id sender;
    agent_id recipient;
    long long parent = 0;       // query this answers / forwards, 0 = none
    tick sent_at = 0;
    double payload_error = -1;  // responses only
    long long round = 0;        // asker's round this message belongs to
    std::vector<agent_id> chain; // asker lineage, for parent-chain exclusion
};

// counts of fusion wins per (field, agent); monotone non-decreasing
struct best_table {
    agent_id owner;
    std::map<std::pair<field_id, agent_id>, long long> counts;

    long long count(const field_id& f, const agent_id& a) const;
    long long total() const;
    // max count over the given candidates for a field (0 when none)
    long long max_count(const field_id& f, const std::vector<agent_id>& candidates) const;
};

enum class agent_mode { unrestricted, intelligent };
enum class agent_phase { phase1, phase2 };

struct agent_state {
    agent_id id;
    agent_profile profile;
    long long remaining_messages = 0;
    long long initial_budget = 0;
    agent_mode mode = agent_mode::unrestricted;
    agent_phase phase = agent_phase::phase1;
    best_table best;
    std::map<agent_id, long long> timeout_counts;
    // peers this agent has observed timing out; cleared by a later response
    std::set<agent_id> known_exhausted;
    // fields with an own resolved fusion / an own round still open
    std::set<field_id> fused_fields;
    std::set<field_id> pending_fields;

    bool unlimited_budget = false; // the external querier never exhausts
    long long total_timeouts() const;
};

enum class delay_kind { uniform_int, scripted };

struct delay_dist {
    delay_kind kind = delay_kind::uniform_int;
    long long lo = 1;
    long long hi = 3;
};

struct sim_config {
    long long k = 1;              // favorites kept per field
    long long c = 1;              // interactions before favorites are chosen
    long long budget = 10;        // messages per peer unless overridden
    long long timeout_ticks = 5;  // sub-round deadline = first send + this
    tick horizon = 50;
    double anneal_p0 = 0.1;       // chance of answering despite worse quality
    double anneal_tau = 0;        // 0 = horizon / 3
    long long timeout_switch_threshold = 1;
    double lottery_threshold_pct = 0.3;
    long long checkin_threshold = 3;
    long long omega_min_responses = 2;
    std::uint64_t seed = 1;
    delay_dist delays;

    double tau() const { return anneal_tau > 0 ? anneal_tau : horizon / 3.0; }
};

// errors: validation_error on out-of-range parameters
void validate_config(const sim_config& cfg);

} // namespace holosim
