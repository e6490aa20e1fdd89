#include "holosim/model.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace holosim {

bool field_schema::declared(const field_id& f) const {
    return std::find(fields.begin(), fields.end(), f) != fields.end();
}

bool field_schema::compound(const field_id& f) const {
    auto it = deps.find(f);
    return it != deps.end() && !it->second.empty();
}

const std::vector<field_id>& field_schema::components(const field_id& f) const {
    static const std::vector<field_id> none;
    auto it = deps.find(f);
    return it == deps.end() ? none : it->second;
}

namespace {

// depth-first cycle search; returns the cycle path when one exists
bool find_cycle(const field_schema& s, const field_id& f,
                std::map<field_id, int>& color, std::vector<field_id>& path) {
    color[f] = 1;
    path.push_back(f);
    for (const auto& d : s.components(f)) {
        auto it = color.find(d);
        int c = it == color.end() ? 0 : it->second;
        if (c == 1) {
            path.push_back(d);
            return true;
        }
        if (c == 0 && find_cycle(s, d, color, path)) return true;
    }
    color[f] = 2;
    path.pop_back();
    return false;
}

} // namespace

field_schema validate_schema(field_schema schema) {
    std::set<field_id> seen;
    for (const auto& f : schema.fields) {
        if (!seen.insert(f).second)
            fail(errc::validation_error, "duplicate field " + f);
    }
    for (const auto& [f, comps] : schema.deps) {
        if (!schema.declared(f))
            fail(errc::undeclared_field, "undeclared field " + f + " in dependencies");
        std::set<field_id> cseen;
        for (const auto& d : comps) {
            if (!schema.declared(d))
                fail(errc::undeclared_field, "undeclared field " + d + " in deps of " + f);
            if (d == f || !cseen.insert(d).second)
                fail(errc::validation_error, "bad component list for " + f);
        }
    }
    std::map<field_id, int> color;
    for (const auto& f : schema.fields) {
        std::vector<field_id> path;
        if (color[f] == 0 && find_cycle(schema, f, color, path)) {
            std::ostringstream os;
            os << "dependency cycle:";
            for (const auto& p : path) os << ' ' << p;
            fail(errc::cycle_detected, os.str());
        }
    }
    const auto& m = message_field();
    if (!schema.declared(m))
        fail(errc::validation_error, "schema lacks the whole-message field " + m);
    std::set<field_id> mdeps(schema.components(m).begin(), schema.components(m).end());
    std::set<field_id> expect;
    for (const auto& f : schema.fields)
        if (f != m) expect.insert(f);
    if (mdeps != expect)
        fail(errc::validation_error,
             message_field() + " must depend on exactly the other declared fields");
    return schema;
}

std::vector<field_id> compound_fields(const field_schema& schema) {
    std::vector<field_id> out;
    for (const auto& f : schema.fields)
        if (schema.compound(f)) out.push_back(f);
    return out;
}

double quality(double err) {
    if (err < 0.0 || err > 1.0)
        fail(errc::out_of_range, "error fraction out of [0,1]");
    return 1.0 - err;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

double agent_profile::error_for(const field_id& f) const {
    auto it = errors.find(f);
    if (it == errors.end())
        fail(errc::unknown_field, agent + " has no error profile for field " + f);
    return it->second;
}

long long best_table::count(const field_id& f, const agent_id& a) const {
    auto it = counts.find({f, a});
    return it == counts.end() ? 0 : it->second;
}

long long best_table::total() const {
    long long t = 0;
    for (const auto& [k, v] : counts) t += v;
    return t;
}

long long best_table::max_count(const field_id& f,
                                const std::vector<agent_id>& candidates) const {
    long long m = 0;
    for (const auto& a : candidates) m = std::max(m, count(f, a));
    return m;
}

long long agent_state::total_timeouts() const {
    long long t = 0;
    for (const auto& [a, n] : timeout_counts) t += n;
    return t;
}

void validate_config(const sim_config& cfg) {
    if (cfg.k < 1) fail(errc::validation_error, "k must be >= 1");
    if (cfg.c < 1) fail(errc::validation_error, "c must be >= 1");
    if (cfg.budget < 0) fail(errc::validation_error, "budget must be >= 0");
    if (cfg.timeout_ticks < 1) fail(errc::validation_error, "timeout_ticks must be >= 1");
    if (cfg.horizon < 0) fail(errc::validation_error, "horizon must be >= 0");
    if (cfg.anneal_p0 < 0 || cfg.anneal_p0 > 1)
        fail(errc::validation_error, "anneal_p0 out of [0,1]");
    if (cfg.lottery_threshold_pct < 0 || cfg.lottery_threshold_pct > 1)
        fail(errc::validation_error, "lottery_threshold_pct out of [0,1]");
    if (cfg.timeout_switch_threshold < 0)
        fail(errc::validation_error, "timeout_switch_threshold must be >= 0");
    if (cfg.checkin_threshold < 0)
        fail(errc::validation_error, "checkin_threshold must be >= 0");
    if (cfg.omega_min_responses < 1)
        fail(errc::validation_error, "omega_min_responses must be >= 1");
    if (cfg.delays.kind == delay_kind::uniform_int &&
        (cfg.delays.lo < 0 || cfg.delays.hi < cfg.delays.lo))
        fail(errc::validation_error, "bad uniform delay interval");
}

} // namespace holosim
