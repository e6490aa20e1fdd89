#include "holosim/scenario.hpp"

#include "holosim/error.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace holosim {

namespace {

[[noreturn]] void parse_fail(int line, const std::string& why) {
    fail(errc::parse_error, "line " + std::to_string(line) + ": " + why);
}

std::string strip(const std::string& raw) {
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos)
        s.erase(hash);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// splits "key=value"; returns false if there is no '='
bool split_kv(const std::string& tok, std::string& key, std::string& val) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) return false;
    key = tok.substr(0, eq);
    val = tok.substr(eq + 1);
    return true;
}

long long to_int(const std::string& s, int line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        parse_fail(line, "expected integer, got '" + s + "'");
    return v;
}

double to_real(const std::string& s, int line) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size())
            parse_fail(line, "expected number, got '" + s + "'");
        return v;
    } catch (const error&) {
        throw;
    } catch (const std::exception&) {
        parse_fail(line, "expected number, got '" + s + "'");
    }
}

std::vector<tick> to_int_list(const std::string& s, int line) {
    std::vector<tick> out;
    std::string cur;
    for (char ch : s + ",") {
        if (ch == ',') {
            if (cur.empty()) parse_fail(line, "empty entry in list '" + s + "'");
            out.push_back(to_int(cur, line));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

struct kv_map {
    int line = 0;
    std::map<std::string, std::string> vals;

    const std::string& need(const std::string& key) const {
        auto it = vals.find(key);
        if (it == vals.end()) parse_fail(line, "missing " + key + "=");
        return it->second;
    }
    bool has(const std::string& key) const { return vals.count(key) != 0; }
};

kv_map parse_kvs(const std::vector<std::string>& toks, size_t from, int line) {
    kv_map out;
    out.line = line;
    for (size_t i = from; i < toks.size(); ++i) {
        std::string k, v;
        if (!split_kv(toks[i], k, v))
            parse_fail(line, "expected key=value, got '" + toks[i] + "'");
        if (!out.vals.emplace(k, v).second)
            parse_fail(line, "duplicate key " + k);
    }
    return out;
}

bool to_yesno(const std::string& s, int line) {
    if (s == "yes") return true;
    if (s == "no") return false;
    parse_fail(line, "expected yes or no, got '" + s + "'");
}

void apply_engine_kv(sim_config& cfg, const std::string& key,
                     const std::vector<std::string>& vals, int line) {
    auto one = [&]() -> const std::string& {
        if (vals.size() != 1) parse_fail(line, key + " takes one value");
        return vals[0];
    };
    if (key == "k") cfg.k = to_int(one(), line);
    else if (key == "c") cfg.c = to_int(one(), line);
    else if (key == "budget") cfg.budget = to_int(one(), line);
    else if (key == "timeout_ticks") cfg.timeout_ticks = to_int(one(), line);
    else if (key == "horizon") cfg.horizon = to_int(one(), line);
    else if (key == "anneal_p0") cfg.anneal_p0 = to_real(one(), line);
    else if (key == "anneal_tau") cfg.anneal_tau = to_real(one(), line);
    else if (key == "timeout_switch_threshold") cfg.timeout_switch_threshold = to_int(one(), line);
    else if (key == "lottery_threshold_pct") cfg.lottery_threshold_pct = to_real(one(), line);
    else if (key == "checkin_threshold") cfg.checkin_threshold = to_int(one(), line);
    else if (key == "omega_min_responses") cfg.omega_min_responses = to_int(one(), line);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(one(), line));
    else if (key == "delays") {
        if (vals.size() == 1 && vals[0] == "scripted") {
            cfg.delays.kind = delay_kind::scripted;
        } else if (vals.size() == 3 && vals[0] == "uniform") {
            cfg.delays.kind = delay_kind::uniform_int;
            cfg.delays.lo = to_int(vals[1], line);
            cfg.delays.hi = to_int(vals[2], line);
        } else {
            parse_fail(line, "delays = scripted | uniform LO HI");
        }
    } else {
        parse_fail(line, "unknown engine key " + key);
    }
}

} // namespace

void validate_scenario(const scenario& s) {
    validate_schema(s.schema);
    validate_config(s.cfg);
    if (s.profiles.empty())
        fail(errc::validation_error, "scenario declares no agents");

    auto compound = compound_fields(s.schema);
    std::set<agent_id> seen;
    for (const auto& p : s.profiles) {
        if (p.agent == omega_id())
            fail(errc::validation_error, "agent id '" + omega_id() + "' is reserved");
        if (!seen.insert(p.agent).second)
            fail(errc::validation_error, "duplicate agent " + p.agent);
        for (const auto& f : compound)
            if (!p.errors.count(f))
                fail(errc::validation_error,
                     p.agent + " missing error for compound field " + f);
        for (const auto& [f, e] : p.errors) {
            if (std::find(compound.begin(), compound.end(), f) == compound.end())
                fail(errc::validation_error,
                     p.agent + " has an error entry for non-compound field " + f);
            if (e < 0.0 || e > 1.0)
                fail(errc::validation_error,
                     p.agent + " error for " + f + " outside [0,1]");
        }
    }
    for (const auto& [a, b] : s.budgets) {
        if (!seen.count(a))
            fail(errc::validation_error, "budget for unknown agent " + a);
        if (b < 0)
            fail(errc::validation_error, "negative budget for " + a);
    }
    for (const auto& q : s.omega_queries) {
        if (q.at < 1)
            fail(errc::validation_error, "external query before tick 1");
        if (!s.schema.compound(q.field))
            fail(errc::validation_error,
                 "external query on non-compound field " + q.field);
        if (q.deadline != 0 && q.deadline <= q.at)
            fail(errc::validation_error, "external query deadline not after injection");
        for (tick tr : q.transits)
            if (tr < 0) fail(errc::validation_error, "negative transit");
    }
    for (const auto& [a, sc] : s.scripts) {
        if (!seen.count(a))
            fail(errc::validation_error, "script for unknown agent " + a);
        for (const auto& e : sc.answers) {
            if (!s.schema.declared(e.field))
                fail(errc::validation_error, "script answer on unknown field " + e.field);
            if (!e.decline && (e.offset < 0 || e.transit < 0))
                fail(errc::validation_error, "negative answer timing for " + a);
        }
        for (const auto& e : sc.queries)
            if (!s.schema.declared(e.field))
                fail(errc::validation_error, "script query on unknown field " + e.field);
        for (const auto& e : sc.subs) {
            if (!s.schema.declared(e.field))
                fail(errc::validation_error, "script sub on unknown field " + e.field);
            if (!seen.count(e.to))
                fail(errc::validation_error, "script sub to unknown agent " + e.to);
            if (e.offset < 0 || e.transit < 0)
                fail(errc::validation_error, "negative sub timing for " + a);
        }
    }
}

std::vector<agent_id> scenario::peer_ids() const {
    std::vector<agent_id> out;
    out.reserve(profiles.size());
    for (const auto& p : profiles) out.push_back(p.agent);
    return out;
}

long long scenario::budget_for(const agent_id& a) const {
    auto it = budgets.find(a);
    return it == budgets.end() ? cfg.budget : it->second;
}

scenario parse_scenario(const std::string& text) {
    scenario s;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool saw_schema = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                parse_fail(line_no, "malformed section header");
            section = line.substr(1, line.size() - 2);
            if (section != "schema" && section != "agents" && section != "budgets" &&
                section != "omega" && section != "delays" && section != "engine")
                parse_fail(line_no, "unknown section [" + section + "]");
            if (section == "schema") saw_schema = true;
            continue;
        }
        if (section.empty())
            parse_fail(line_no, "directive before any section");

        auto toks = tokenize(line);

        if (section == "schema") {
            if (toks[0] == "fields") {
                for (size_t i = 1; i < toks.size(); ++i)
                    s.schema.fields.push_back(toks[i]);
            } else if (toks[0] == "dep") {
                if (toks.size() < 4 || toks[2] != "=")
                    parse_fail(line_no, "dep FIELD = COMPONENTS...");
                std::vector<field_id> comps(toks.begin() + 3, toks.end());
                if (!s.schema.deps.emplace(toks[1], std::move(comps)).second)
                    parse_fail(line_no, "duplicate dep for " + toks[1]);
            } else {
                parse_fail(line_no, "unknown schema directive " + toks[0]);
            }
        } else if (section == "agents") {
            if (toks.size() < 3 || toks[0] != "agent" || toks[2] != "errors")
                parse_fail(line_no, "agent NAME errors F=E...");
            agent_profile p;
            p.agent = toks[1];
            auto kv = parse_kvs(toks, 3, line_no);
            for (const auto& [f, v] : kv.vals)
                p.errors[f] = to_real(v, line_no);
            s.profiles.push_back(std::move(p));
        } else if (section == "budgets") {
            if (toks.size() != 2)
                parse_fail(line_no, "AGENT BUDGET");
            if (!s.budgets.emplace(toks[0], to_int(toks[1], line_no)).second)
                parse_fail(line_no, "duplicate budget for " + toks[0]);
        } else if (section == "omega") {
            if (toks.empty() || toks[0] != "query")
                parse_fail(line_no, "query at=T field=F [deadline=T] [transits=...]");
            auto kv = parse_kvs(toks, 1, line_no);
            omega_query q;
            q.at = to_int(kv.need("at"), line_no);
            q.field = kv.need("field");
            if (kv.has("deadline")) q.deadline = to_int(kv.vals.at("deadline"), line_no);
            if (kv.has("transits")) q.transits = to_int_list(kv.vals.at("transits"), line_no);
            s.omega_queries.push_back(std::move(q));
        } else if (section == "delays") {
            if (toks.size() < 2)
                parse_fail(line_no, "AGENT answer|query|sub|lottery ...");
            agent_script& sc = s.scripts[toks[0]];
            const std::string& what = toks[1];
            if (what == "answer") {
                answer_entry e;
                kv_map kv;
                kv.line = line_no;
                for (size_t i = 2; i < toks.size(); ++i) {
                    if (toks[i] == "decline") {
                        e.decline = true;
                        continue;
                    }
                    std::string k, v;
                    if (!split_kv(toks[i], k, v))
                        parse_fail(line_no, "expected key=value, got '" + toks[i] + "'");
                    if (!kv.vals.emplace(k, v).second)
                        parse_fail(line_no, "duplicate key " + k);
                }
                e.field = kv.need("field");
                if (!e.decline) {
                    e.offset = to_int(kv.need("offset"), line_no);
                    e.transit = to_int(kv.need("transit"), line_no);
                }
                sc.answers.push_back(std::move(e));
            } else if (what == "query") {
                auto kv = parse_kvs(toks, 2, line_no);
                query_entry e;
                e.field = kv.need("field");
                e.yes = to_yesno(kv.need("answer"), line_no);
                sc.queries.push_back(e);
            } else if (what == "sub") {
                auto kv = parse_kvs(toks, 2, line_no);
                sub_entry e;
                e.field = kv.need("field");
                e.to = kv.need("to");
                e.offset = to_int(kv.need("offset"), line_no);
                e.transit = to_int(kv.need("transit"), line_no);
                sc.subs.push_back(std::move(e));
            } else if (what == "lottery") {
                if (toks.size() != 3)
                    parse_fail(line_no, "AGENT lottery pass|decline");
                if (toks[2] == "pass") sc.lottery.push_back(true);
                else if (toks[2] == "decline") sc.lottery.push_back(false);
                else parse_fail(line_no, "lottery draw is pass or decline");
            } else {
                parse_fail(line_no, "unknown delay directive " + what);
            }
        } else if (section == "engine") {
            if (toks.size() < 3 || toks[1] != "=")
                parse_fail(line_no, "KEY = VALUE");
            apply_engine_kv(s.cfg, toks[0],
                            std::vector<std::string>(toks.begin() + 2, toks.end()),
                            line_no);
        }
    }

    if (!saw_schema)
        fail(errc::parse_error, "no [schema] section");
    validate_scenario(s);
    return s;
}

std::string render_scenario(const scenario& s) {
    std::ostringstream out;
    out << "[schema]\nfields";
    for (const auto& f : s.schema.fields) out << ' ' << f;
    out << '\n';
    for (const auto& f : s.schema.fields) {
        auto it = s.schema.deps.find(f);
        if (it == s.schema.deps.end() || it->second.empty()) continue;
        out << "dep " << f << " =";
        for (const auto& c : it->second) out << ' ' << c;
        out << '\n';
    }

    out << "\n[agents]\n";
    auto compound = compound_fields(s.schema);
    for (const auto& p : s.profiles) {
        out << "agent " << p.agent << " errors";
        for (const auto& f : compound)
            out << ' ' << f << '=' << format_double(p.errors.at(f));
        out << '\n';
    }

    if (!s.budgets.empty()) {
        out << "\n[budgets]\n";
        for (const auto& [a, b] : s.budgets) out << a << ' ' << b << '\n';
    }

    if (!s.omega_queries.empty()) {
        out << "\n[omega]\n";
        for (const auto& q : s.omega_queries) {
            out << "query at=" << q.at << " field=" << q.field;
            if (q.deadline != 0) out << " deadline=" << q.deadline;
            if (!q.transits.empty()) {
                out << " transits=";
                for (size_t i = 0; i < q.transits.size(); ++i)
                    out << (i ? "," : "") << q.transits[i];
            }
            out << '\n';
        }
    }

    bool any_script = false;
    for (const auto& [a, sc] : s.scripts)
        if (!sc.empty()) any_script = true;
    if (any_script) {
        out << "\n[delays]\n";
        for (const auto& p : s.profiles) {
            auto it = s.scripts.find(p.agent);
            if (it == s.scripts.end() || it->second.empty()) continue;
            const auto& sc = it->second;
            for (const auto& e : sc.answers) {
                out << p.agent << " answer field=" << e.field;
                if (e.decline) out << " decline";
                else out << " offset=" << e.offset << " transit=" << e.transit;
                out << '\n';
            }
            for (const auto& e : sc.queries)
                out << p.agent << " query field=" << e.field
                    << " answer=" << (e.yes ? "yes" : "no") << '\n';
            for (const auto& e : sc.subs)
                out << p.agent << " sub field=" << e.field << " to=" << e.to
                    << " offset=" << e.offset << " transit=" << e.transit << '\n';
            for (bool d : sc.lottery)
                out << p.agent << " lottery " << (d ? "pass" : "decline") << '\n';
        }
    }

    out << "\n[engine]\n";
    out << "k = " << s.cfg.k << '\n';
    out << "c = " << s.cfg.c << '\n';
    out << "budget = " << s.cfg.budget << '\n';
    out << "timeout_ticks = " << s.cfg.timeout_ticks << '\n';
    out << "horizon = " << s.cfg.horizon << '\n';
    out << "anneal_p0 = " << format_double(s.cfg.anneal_p0) << '\n';
    out << "anneal_tau = " << format_double(s.cfg.anneal_tau) << '\n';
    out << "timeout_switch_threshold = " << s.cfg.timeout_switch_threshold << '\n';
    out << "lottery_threshold_pct = " << format_double(s.cfg.lottery_threshold_pct) << '\n';
    out << "checkin_threshold = " << s.cfg.checkin_threshold << '\n';
    out << "omega_min_responses = " << s.cfg.omega_min_responses << '\n';
    out << "seed = " << s.cfg.seed << '\n';
    if (s.cfg.delays.kind == delay_kind::scripted)
        out << "delays = scripted\n";
    else
        out << "delays = uniform " << s.cfg.delays.lo << ' ' << s.cfg.delays.hi << '\n';
    return out.str();
}

bool scenario_equal(const scenario& a, const scenario& b) {
    return render_scenario(a) == render_scenario(b);
}

namespace {

const char* const reference_text = R"(# reference run: three peers, one external querier, fully scripted timing

[schema]
fields A B C D E F G M
dep A = B C
dep B = G
dep C = D
dep D = E F G
dep M = A B C D E F G

[agents]
agent alpha errors A=0.05 B=0.1 C=0.15 D=0.2 M=0.05
agent beta errors A=0.25 B=0.1 C=0.1 D=0.15 M=0.1
agent gamma errors A=0.1 B=0.15 C=0.2 D=0.15 M=0.25

[budgets]
alpha 10
beta 10
gamma 10

[omega]
query at=1 field=M deadline=14 transits=4,5,8
query at=15 field=M deadline=20 transits=1
query at=21 field=M deadline=23 transits=1
query at=25 field=M deadline=30 transits=1
query at=31 field=M deadline=32 transits=1
query at=33 field=M deadline=34 transits=1
query at=35 field=M deadline=36 transits=1
query at=37 field=M deadline=46 transits=1,2
query at=38 field=M deadline=50 transits=0,2
query at=47 field=M deadline=49 transits=1
query at=49 field=M deadline=51 transits=1

[delays]
alpha answer field=M offset=8 transit=1
alpha answer field=M offset=4 transit=0
alpha answer field=M offset=1 transit=0
alpha answer field=M offset=0 transit=4
alpha answer field=M offset=0 transit=0
alpha answer field=M offset=0 transit=0
alpha query field=A answer=yes
alpha query field=B answer=no
alpha query field=C answer=no
alpha query field=D answer=no
alpha query field=B answer=no
alpha query field=C answer=yes
alpha query field=D answer=no
alpha query field=B answer=no
alpha query field=D answer=no
alpha query field=B answer=no
alpha query field=D answer=no
alpha query field=D answer=no
alpha query field=B answer=no
alpha query field=D answer=no
alpha sub field=A to=beta offset=0 transit=0
alpha sub field=A to=gamma offset=1 transit=0
alpha sub field=C to=beta offset=1 transit=0
alpha sub field=C to=gamma offset=0 transit=1
alpha lottery pass
alpha lottery pass
alpha lottery pass
beta answer field=M offset=3 transit=2
beta answer field=C offset=1 transit=0
beta answer field=M offset=1 transit=7
beta query field=B answer=no
beta query field=C answer=no
beta query field=A answer=no
beta query field=B answer=yes
beta query field=C answer=yes
beta query field=D answer=yes
beta query field=A answer=yes
beta sub field=B to=alpha offset=0 transit=2
beta sub field=B to=gamma offset=0 transit=3
beta sub field=C to=alpha offset=22 transit=0
beta sub field=C to=gamma offset=21 transit=1
beta sub field=D to=alpha offset=1 transit=1
beta sub field=D to=gamma offset=1 transit=3
beta sub field=A to=gamma offset=1 transit=1
beta lottery pass
beta lottery decline
beta lottery pass
beta lottery decline
gamma answer field=M decline
gamma answer field=M decline
gamma answer field=M offset=5 transit=5
gamma answer field=A offset=0 transit=1
gamma answer field=M offset=2 transit=1
gamma query field=B answer=no
gamma query field=C answer=no
gamma query field=A answer=no
gamma query field=B answer=no
gamma query field=C answer=no
gamma query field=D answer=no
gamma query field=D answer=no
gamma query field=D answer=no
gamma query field=A answer=no
gamma query field=B answer=no
gamma query field=C answer=no
gamma query field=D answer=no
gamma query field=A answer=no
gamma query field=B answer=no
gamma query field=C answer=no
gamma query field=D answer=no
gamma query field=B answer=yes
gamma query field=C answer=no
gamma query field=A answer=no
gamma query field=C answer=no
gamma query field=D answer=no
gamma sub field=B to=alpha offset=2 transit=1

[engine]
k = 1
c = 1
budget = 10
timeout_ticks = 5
horizon = 50
anneal_p0 = 0
anneal_tau = 16
timeout_switch_threshold = 1
lottery_threshold_pct = 0.3
checkin_threshold = 3
omega_min_responses = 2
seed = 1
delays = scripted
)";

// step series: (from tick, value); value holds until the next breakpoint
using series = std::vector<std::pair<tick, long long>>;

long long value_at(const series& s, tick t) {
    long long v = 0;
    for (const auto& [from, val] : s) {
        if (from <= t) v = val;
        else break;
    }
    return v;
}

std::string build_csv(const std::string& header, const std::vector<series>& cols,
                      tick t_max) {
    std::ostringstream out;
    out << header << '\n';
    for (tick t = 1; t <= t_max; ++t) {
        out << t;
        for (const auto& c : cols) out << ',' << value_at(c, t);
        out << '\n';
    }
    return out.str();
}

} // namespace

const std::string& paper_example_text() {
    static const std::string text = reference_text;
    return text;
}

scenario paper_example() {
    static const scenario s = parse_scenario(paper_example_text());
    return s;
}

// the expected evolutions below are transcribed from hand-walked breakpoints,
// not produced by the engine, so they stay an independent check on it

const std::string& golden_best0_csv() {
    static const std::string text = build_csv(
        "t,alpha,beta,gamma",
        {
            {{1, 0}, {14, 1}, {20, 2}, {23, 3}, {30, 4}, {32, 5}, {34, 6}},
            {{1, 0}, {46, 1}},
            {{1, 0}, {50, 1}},
        },
        50);
    return text;
}

const std::string& golden_remaining_csv() {
    static const std::string text = build_csv(
        "t,alpha,beta,gamma",
        {
            {{1, 10}, {5, 9}, {6, 8}, {13, 7}, {16, 6}, {17, 5},
             {20, 4}, {23, 3}, {26, 2}, {32, 1}, {34, 0}},
            {{1, 10}, {6, 8}, {7, 6}, {9, 5}, {18, 4}, {27, 3}, {28, 2}, {39, 0}},
            {{1, 10}, {40, 9}, {42, 8}, {45, 7}},
        },
        50);
    return text;
}

const std::string& golden_best_csv() {
    static const std::string text = build_csv(
        "t,alpha.A.alpha,alpha.C.beta,beta.A.gamma,beta.B.beta,"
        "beta.C.beta,beta.D.beta,gamma.B.gamma",
        {
            {{1, 0}, {6, 1}},
            {{1, 0}, {18, 1}},
            {{1, 0}, {41, 1}},
            {{1, 0}, {9, 1}},
            {{1, 0}, {28, 1}},
            {{1, 0}, {10, 1}},
            {{1, 0}, {47, 1}},
        },
        50);
    return text;
}

std::vector<timeline_entry> golden_timeline() {
    return {
        {14, true, "alpha"},
        {36, false, "alpha"},
        {46, true, "beta"},
        {49, true, "gamma"},
    };
}

} // namespace holosim
