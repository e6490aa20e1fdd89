#include "holosim/engine.hpp"

#include "holosim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace holosim {

namespace {

const char* kind_tag(ev_kind k) {
    switch (k) {
        case ev_kind::send: return "send";
        case ev_kind::deliver: return "deliver";
        case ev_kind::decline: return "decline";
        case ev_kind::timeout: return "timeout";
        case ev_kind::fusion: return "fusion";
        case ev_kind::table: return "table";
        case ev_kind::mode: return "mode";
        case ev_kind::hint: return "hint";
    }
    return "?";
}

const char* msg_tag(msg_kind k) {
    switch (k) {
        case msg_kind::query: return "query";
        case msg_kind::response: return "response";
        case msg_kind::check_in: return "check_in";
        case msg_kind::check_in_reply: return "check_in_reply";
    }
    return "?";
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

void emit(world_state& w, event e) {
    e.t = w.clock;
    w.trace.events.push_back(std::move(e));
}

bool is_scripted(const world_state& w) {
    return w.cfg.delays.kind == delay_kind::scripted;
}

// --- scripted stream cursors ---------------------------------------------

const answer_entry& pop_answer(world_state& w, const agent_id& who, const field_id& f) {
    const auto& sc = w.scn.scripts[who];
    auto& cur = w.cursors[who].answers;
    if (cur >= sc.answers.size())
        fail(errc::script_exhausted, who + " has no scripted answer left for " + f);
    const auto& e = sc.answers[cur++];
    if (e.field != f)
        fail(errc::script_mismatch,
             who + " scripted answer covers " + e.field + ", asked about " + f);
    return e;
}

bool pop_query(world_state& w, const agent_id& who, const field_id& f) {
    const auto& sc = w.scn.scripts[who];
    auto& cur = w.cursors[who].queries;
    if (cur >= sc.queries.size())
        fail(errc::script_exhausted, who + " has no scripted query decision left for " + f);
    const auto& e = sc.queries[cur++];
    if (e.field != f)
        fail(errc::script_mismatch,
             who + " scripted query decision covers " + e.field + ", needed " + f);
    return e.yes;
}

const sub_entry& pop_sub(world_state& w, const agent_id& who, const field_id& f,
                         const agent_id& to) {
    const auto& sc = w.scn.scripts[who];
    auto& cur = w.cursors[who].subs;
    if (cur >= sc.subs.size())
        fail(errc::script_exhausted, who + " has no scripted sub-query left for " + f);
    const auto& e = sc.subs[cur++];
    if (e.field != f || e.to != to)
        fail(errc::script_mismatch, who + " scripted sub-query covers " + e.field +
                                        "->" + e.to + ", needed " + f + "->" + to);
    return e;
}

bool pop_lottery(world_state& w, const agent_id& who) {
    const auto& sc = w.scn.scripts[who];
    auto& cur = w.cursors[who].lottery;
    if (cur >= sc.lottery.size())
        fail(errc::script_exhausted, who + " has no scripted lottery draw left");
    return sc.lottery[cur++];
}

decision_draws scripted_draws(world_state& w, const agent_id& who) {
    decision_draws d;
    d.lottery = [&w, who]() { return pop_lottery(w, who); };
    d.anneal = [&w](double p) { return w.gen.bernoulli(p); };
    return d;
}

// --- tick machinery -------------------------------------------------------

void fire_send(world_state& w, const pending_send& ps);
void deliver(world_state& w, const message& m);
void handle_query(world_state& w, const message& q);
void handle_response(world_state& w, const message& m);
void maybe_fuse(world_state& w, round_state& r);
void fuse(world_state& w, round_state& r);

// a send whose fire tick has already come fires right here (a zero offset);
// zero transit then also delivers right here, which is what lets same-tick
// cascades happen inside one tick
void schedule_send(world_state& w, pending_send ps) {
    ps.seq = w.next_seq++;
    if (ps.fire_at <= w.clock)
        fire_send(w, ps);
    else
        w.sched.push_back(std::move(ps));
}

void fire_send(world_state& w, const pending_send& ps) {
    auto& sender = w.agents.at(ps.sender);
    round_state* r = ps.round ? &w.rounds.at(ps.round) : nullptr;
    if (ps.kind == msg_kind::query && r) --r->outstanding;

    if (!sender.unlimited_budget && sender.remaining_messages <= 0) {
        // nothing left at fire time: the message silently never exists.
        // an asker learns about a dropped query only through its deadline.
        if (ps.kind == msg_kind::query && r) maybe_fuse(w, *r);
        return;
    }
    if (!sender.unlimited_budget) --sender.remaining_messages;

    message m;
    m.id = w.next_mid++;
    m.kind = ps.kind;
    m.field = ps.field;
    m.sender = ps.sender;
    m.recipient = ps.recipient;
    m.parent = ps.parent_mid;
    m.sent_at = w.clock;
    m.payload_error = ps.err;
    m.round = ps.round;
    m.chain = ps.chain;

    event e;
    e.kind = ev_kind::send;
    e.a = ps.sender;
    e.b = ps.recipient;
    e.field = ps.field;
    e.mid = m.id;
    e.round = ps.round;
    e.detail = msg_tag(ps.kind);
    if (ps.kind == msg_kind::response) e.err = ps.err;
    emit(w, std::move(e));

    if (ps.kind == msg_kind::query && r) {
        r->legs[ps.recipient] = leg_state::pending;
        r->leg_mid[ps.recipient] = m.id;
        if (r->first_send < 0) {
            r->first_send = w.clock;
            if (r->deadline < 0) r->deadline = w.clock + w.cfg.timeout_ticks;
        }
    }

    if (ps.transit <= 0)
        deliver(w, m);
    else
        w.in_flight.emplace(m.id, in_flight_msg{m, w.clock + ps.transit});
}

// free, instant: a refusal costs no message and takes no transit
void notify_decline(world_state& w, const message& q, const char* reason) {
    event e;
    e.kind = ev_kind::decline;
    e.a = q.recipient;
    e.b = q.sender;
    e.field = q.field;
    e.mid = q.id;
    e.round = q.round;
    e.detail = reason;
    emit(w, std::move(e));

    auto it = w.rounds.find(q.round);
    if (it == w.rounds.end()) return;
    auto& r = it->second;
    if (r.resolved) return;
    auto lg = r.legs.find(q.recipient);
    if (lg != r.legs.end() && lg->second == leg_state::pending) {
        lg->second = leg_state::declined;
        maybe_fuse(w, r);
    }
}

// one sub-round: pick recipients by table tier, lottery-gate each send when
// the balance is low, and queue the queries
void open_round(world_state& w, agent_state& owner, const field_id& comp,
                const std::vector<agent_id>& parent_chain) {
    std::vector<agent_id> chain = parent_chain;
    chain.push_back(owner.id);

    auto recipients = select_recipients(owner, comp, w.peers, chain);
    if (recipients.empty()) return; // nobody askable, not even a round

    long long rid = w.next_round++;
    auto& r = w.rounds[rid];
    r.id = rid;
    r.owner = owner.id;
    r.field = comp;
    r.own_error = owner.profile.error_for(comp);
    r.chain = std::move(chain);
    owner.pending_fields.insert(comp);

    bool under = !owner.unlimited_budget &&
                 owner.remaining_messages <
                     w.cfg.lottery_threshold_pct * owner.initial_budget;
    // gate and script the whole fan-out before anything fires: a zero-offset
    // send can cascade into an instant decline, and the round must already
    // know how many legs it is waiting for when that happens
    std::vector<pending_send> queued;
    for (const auto& rec : recipients) {
        if (under) {
            bool pass = is_scripted(w) ? pop_lottery(w, owner.id)
                                       : w.gen.below(2) == 0;
            if (!pass) continue; // keeps the message, leaves the peer unasked
        }
        pending_send ps;
        ps.kind = msg_kind::query;
        ps.sender = owner.id;
        ps.recipient = rec;
        ps.field = comp;
        ps.round = rid;
        ps.err = r.own_error; // askers advertise their own error
        ps.chain = r.chain;
        if (is_scripted(w)) {
            const auto& e = pop_sub(w, owner.id, comp, rec);
            ps.fire_at = w.clock + e.offset;
            ps.transit = e.transit;
        } else {
            ps.fire_at = w.clock;
            ps.transit = draw_delay(w.gen, w.cfg.delays);
        }
        queued.push_back(std::move(ps));
    }
    r.outstanding += static_cast<long long>(queued.size());
    for (auto& ps : queued)
        schedule_send(w, std::move(ps));
    maybe_fuse(w, w.rounds.at(rid)); // every send skipped -> own estimate wins
}

// components the recipient has no verdict on yet spawn sub-rounds
void forward_components(world_state& w, const message& q) {
    auto& resp = w.agents.at(q.recipient);
    if (!resp.unlimited_budget && resp.remaining_messages <= 0) return;
    const auto& schema = w.scn.schema;
    if (!schema.compound(q.field)) return;

    for (const auto& comp : schema.components(q.field)) {
        if (!schema.compound(comp)) continue; // leaves have nothing to ask
        if (resp.fused_fields.count(comp) || resp.pending_fields.count(comp))
            continue;
        bool go = is_scripted(w) ? pop_query(w, q.recipient, comp)
                                 : decide_query(resp, comp, schema, w.gen);
        if (go) open_round(w, resp, comp, q.chain);
    }
}

void handle_query(world_state& w, const message& q) {
    auto& resp = w.agents.at(q.recipient);

    // flat broke peers don't answer, don't refuse, don't forward
    if (!resp.unlimited_budget && resp.remaining_messages <= 0) return;

    decision_draws draws =
        is_scripted(w) ? scripted_draws(w, q.recipient) : rng_draws(w.gen);
    auto decision =
        decide_answer(resp, q.field, q.payload_error, w.clock, w.cfg, draws);

    switch (decision.verdict) {
        case answer_verdict::answer: {
            tick offset = 0, transit = 0;
            bool script_decline = false;
            if (is_scripted(w)) {
                const auto& e = pop_answer(w, q.recipient, q.field);
                if (e.decline) script_decline = true;
                else {
                    offset = e.offset;
                    transit = e.transit;
                }
            } else {
                transit = draw_delay(w.gen, w.cfg.delays);
            }
            if (script_decline) {
                notify_decline(w, q, "scripted");
            } else {
                pending_send ps;
                ps.fire_at = w.clock + offset;
                ps.kind = msg_kind::response;
                ps.sender = q.recipient;
                ps.recipient = q.sender;
                ps.field = q.field;
                ps.parent_mid = q.id;
                ps.round = q.round;
                ps.transit = transit;
                ps.err = decision.error;
                schedule_send(w, std::move(ps));
            }
            break;
        }
        case answer_verdict::decline_lower_quality:
            notify_decline(w, q, "quality");
            break;
        case answer_verdict::decline_lottery:
            notify_decline(w, q, "lottery");
            break;
        case answer_verdict::decline_no_budget:
        case answer_verdict::decline_scripted:
            return; // silent; nothing is consumed past this point either
    }

    forward_components(w, q);
}

void handle_response(world_state& w, const message& m) {
    auto it = w.rounds.find(m.round);
    if (it == w.rounds.end()) return;
    auto& r = it->second;
    auto& owner = w.agents.at(r.owner);

    owner.known_exhausted.erase(m.sender); // an answer proves it's alive

    if (r.resolved) return; // late answer: recorded in the trace, ignored here

    auto lg = r.legs.find(m.sender);
    if (lg != r.legs.end() && lg->second == leg_state::pending)
        lg->second = leg_state::responded;
    r.responses.emplace_back(m.sender, m.payload_error);
    maybe_fuse(w, r);
}

void deliver(world_state& w, const message& m) {
    event e;
    e.kind = ev_kind::deliver;
    e.a = m.sender;
    e.b = m.recipient;
    e.field = m.field;
    e.mid = m.id;
    e.round = m.round;
    e.detail = msg_tag(m.kind);
    if (m.kind == msg_kind::response) e.err = m.payload_error;
    emit(w, std::move(e));

    if (m.kind == msg_kind::query) handle_query(w, m);
    else if (m.kind == msg_kind::response) handle_response(w, m);
}

std::optional<agent_id> unique_argmax(const best_table& b, const field_id& f) {
    long long best = 0;
    std::optional<agent_id> who;
    bool tie = false;
    for (const auto& [key, c] : b.counts) {
        if (key.first != f || c <= 0) continue;
        if (c > best) {
            best = c;
            who = key.second;
            tie = false;
        } else if (c == best) {
            tie = true;
        }
    }
    if (tie) return std::nullopt;
    return who;
}

void fuse(world_state& w, round_state& r) {
    r.resolved = true;
    auto& owner = w.agents.at(r.owner);
    auto fused = fuse_responses(r.own_error, r.responses);
    agent_id winner = fused.winner ? *fused.winner : r.owner;

    event fe;
    fe.kind = ev_kind::fusion;
    fe.a = r.owner;
    fe.b = winner;
    fe.field = r.field;
    fe.round = r.id;
    fe.err = fused.error;
    emit(w, std::move(fe));

    auto before = unique_argmax(owner.best, r.field);
    record_outcome(owner.best, r.field, fused, r.owner);

    event te;
    te.kind = ev_kind::table;
    te.a = r.owner;
    te.b = winner;
    te.field = r.field;
    te.round = r.id;
    te.count = owner.best.count(r.field, winner);
    emit(w, std::move(te));

    auto after = unique_argmax(owner.best, r.field);
    if (after && after != before) {
        event he;
        he.kind = ev_kind::hint;
        he.a = r.owner;
        he.b = *after;
        he.field = r.field;
        emit(w, std::move(he));
    }

    owner.pending_fields.erase(r.field);
    owner.fused_fields.insert(r.field);
}

void maybe_fuse(world_state& w, round_state& r) {
    if (r.resolved) return;
    if (r.is_omega &&
        static_cast<long long>(r.responses.size()) >= w.cfg.omega_min_responses) {
        fuse(w, r);
        return;
    }
    if (r.outstanding > 0) return;
    for (const auto& [who, st] : r.legs)
        if (st == leg_state::pending) return;
    fuse(w, r);
}

void expire(world_state& w, round_state& r) {
    auto& owner = w.agents.at(r.owner);
    for (auto& [target, st] : r.legs) {
        if (st != leg_state::pending) continue;
        st = leg_state::timed_out;

        event e;
        e.kind = ev_kind::timeout;
        e.a = r.owner;
        e.b = target;
        e.field = r.field;
        e.mid = r.leg_mid[target];
        e.round = r.id;
        emit(w, std::move(e));

        owner.timeout_counts[target] += 1;
        owner.known_exhausted.insert(target);
        if (owner.mode != agent_mode::intelligent) {
            check_mode_switch(owner, w.cfg);
            if (owner.mode == agent_mode::intelligent) {
                event me;
                me.kind = ev_kind::mode;
                me.a = r.owner;
                me.detail = "intelligent";
                emit(w, std::move(me));
            }
        }
    }
    fuse(w, r);
}

void inject(world_state& w, const omega_query& q) {
    auto& om = w.agents.at(omega_id());
    long long rid = w.next_round++;
    auto& r = w.rounds[rid];
    r.id = rid;
    r.owner = om.id;
    r.field = q.field;
    r.own_error = 1.0; // the querier holds no estimate of its own
    r.is_omega = true;
    r.chain = {om.id};
    if (q.deadline > 0) r.deadline = q.deadline;
    om.pending_fields.insert(q.field);

    auto recipients = select_recipients(om, q.field, w.peers, r.chain);
    if (is_scripted(w) && q.transits.size() != recipients.size())
        fail(errc::script_mismatch,
             "external query at tick " + std::to_string(w.clock) + " lists " +
                 std::to_string(q.transits.size()) + " transits for " +
                 std::to_string(recipients.size()) + " recipients");

    std::vector<pending_send> queued;
    for (std::size_t i = 0; i < recipients.size(); ++i) {
        pending_send ps;
        ps.fire_at = w.clock;
        ps.kind = msg_kind::query;
        ps.sender = om.id;
        ps.recipient = recipients[i];
        ps.field = q.field;
        ps.round = rid;
        ps.err = r.own_error;
        ps.chain = r.chain;
        ps.transit = is_scripted(w) ? q.transits[i] : draw_delay(w.gen, w.cfg.delays);
        queued.push_back(std::move(ps));
    }
    r.outstanding += static_cast<long long>(queued.size());
    for (auto& ps : queued)
        schedule_send(w, std::move(ps));
    maybe_fuse(w, w.rounds.at(rid));
}

} // namespace

long long draw_delay(rng& r, const delay_dist& d) {
    if (d.kind == delay_kind::scripted)
        fail(errc::validation_error,
             "scripted transits come from the scenario streams, not draws");
    if (d.lo < 0 || d.hi < d.lo)
        fail(errc::validation_error, "delay bounds must satisfy 0 <= lo <= hi");
    return r.uniform_int(d.lo, d.hi);
}

world_state init_world(const scenario& scn, const sim_config& cfg) {
    validate_config(cfg);
    validate_scenario(scn);

    world_state w;
    w.cfg = cfg;
    w.scn = scn;
    w.scn.cfg = cfg;
    w.peers = scn.peer_ids();
    w.gen = rng(cfg.seed);

    for (const auto& p : scn.profiles) {
        agent_state a;
        a.id = p.agent;
        a.profile = p;
        a.initial_budget = a.remaining_messages = w.scn.budget_for(p.agent);
        w.agents.emplace(p.agent, std::move(a));
    }

    agent_state om;
    om.id = omega_id();
    om.profile.agent = om.id;
    for (const auto& f : compound_fields(scn.schema))
        om.profile.errors[f] = 1.0;
    om.unlimited_budget = true;
    w.agents.emplace(om.id, std::move(om));

    w.trace.peers = w.peers;
    for (const auto& p : w.peers) w.trace.budgets[p] = w.scn.budget_for(p);
    w.trace.horizon = cfg.horizon;
    w.trace.k = cfg.k;

    // a zero switch threshold starts everyone in economy mode
    for (auto& [id, a] : w.agents) check_mode_switch(a, cfg);
    return w;
}

world_state init_world(const scenario& scn) { return init_world(scn, scn.cfg); }

void step(world_state& w) {
    if (w.clock >= w.cfg.horizon)
        fail(errc::horizon_exceeded,
             "tick " + std::to_string(w.clock + 1) + " lies past the horizon");
    tick t = ++w.clock;

    // 1. due sends, in schedule order; cascades nest at their trigger point
    std::vector<pending_send> due;
    for (auto it = w.sched.begin(); it != w.sched.end();) {
        if (it->fire_at <= t) {
            due.push_back(std::move(*it));
            it = w.sched.erase(it);
        } else {
            ++it;
        }
    }
    std::sort(due.begin(), due.end(),
              [](const pending_send& x, const pending_send& y) { return x.seq < y.seq; });
    for (const auto& ps : due) fire_send(w, ps);

    // 2. arrivals, in message id order
    std::vector<long long> arriving;
    for (const auto& [mid, f] : w.in_flight)
        if (f.deliver_at <= t) arriving.push_back(mid);
    for (long long mid : arriving) {
        auto node = w.in_flight.extract(mid);
        deliver(w, node.mapped().msg);
    }

    // 3. rounds at their deadline, by (owner, round id)
    std::vector<std::pair<agent_id, long long>> overdue;
    for (const auto& [rid, r] : w.rounds)
        if (!r.resolved && r.deadline == t) overdue.emplace_back(r.owner, rid);
    std::sort(overdue.begin(), overdue.end());
    for (const auto& [who, rid] : overdue) {
        auto& r = w.rounds.at(rid);
        if (!r.resolved) expire(w, r);
    }

    // 4. externally scheduled queries, in scenario order
    for (const auto& q : w.scn.omega_queries)
        if (q.at == t) inject(w, q);
}

event_trace run(const scenario& scn, const sim_config& cfg) {
    world_state w = init_world(scn, cfg);
    while (w.clock < w.cfg.horizon) step(w);
    return w.trace;
}

event_trace run(const scenario& scn) { return run(scn, scn.cfg); }

std::string world_digest(const world_state& w) {
    std::ostringstream o;
    o << "t=" << w.clock << " mid=" << w.next_mid << " inflight=" << w.in_flight.size()
      << " sched=" << w.sched.size() << '\n';
    for (const auto& [id, a] : w.agents) {
        o << id << " rem=" << (a.unlimited_budget ? -1 : a.remaining_messages)
          << " mode=" << (a.mode == agent_mode::intelligent ? "intelligent" : "unrestricted")
          << " fused=" << a.fused_fields.size() << " timeouts=" << a.total_timeouts()
          << " wins=" << a.best.total() << '\n';
    }
    return o.str();
}

// --- trace io -------------------------------------------------------------

namespace {

void write_str(std::ostringstream& o, const char* key, const std::string& v) {
    o << ",\"" << key << "\":\"" << json_escape(v) << '"';
}

std::string serialize_event(const event& e) {
    std::ostringstream o;
    o << "{\"t\":" << e.t << ",\"ev\":\"" << kind_tag(e.kind) << '"';
    switch (e.kind) {
        case ev_kind::send:
        case ev_kind::deliver:
            write_str(o, "from", e.a);
            write_str(o, "to", e.b);
            write_str(o, "field", e.field);
            o << ",\"mid\":" << e.mid;
            write_str(o, "kind", e.detail);
            o << ",\"round\":" << e.round;
            if (e.err >= 0) o << ",\"err\":" << format_double(e.err);
            break;
        case ev_kind::decline:
            write_str(o, "from", e.a);
            write_str(o, "to", e.b);
            write_str(o, "field", e.field);
            o << ",\"mid\":" << e.mid;
            write_str(o, "reason", e.detail);
            o << ",\"round\":" << e.round;
            break;
        case ev_kind::timeout:
            write_str(o, "owner", e.a);
            write_str(o, "target", e.b);
            write_str(o, "field", e.field);
            o << ",\"mid\":" << e.mid << ",\"round\":" << e.round;
            break;
        case ev_kind::fusion:
            write_str(o, "owner", e.a);
            write_str(o, "field", e.field);
            write_str(o, "winner", e.b);
            o << ",\"err\":" << format_double(e.err) << ",\"round\":" << e.round;
            break;
        case ev_kind::table:
            write_str(o, "owner", e.a);
            write_str(o, "field", e.field);
            write_str(o, "agent", e.b);
            o << ",\"count\":" << e.count;
            break;
        case ev_kind::mode:
            write_str(o, "agent", e.a);
            write_str(o, "mode", e.detail);
            break;
        case ev_kind::hint:
            write_str(o, "owner", e.a);
            write_str(o, "field", e.field);
            write_str(o, "agent", e.b);
            break;
    }
    o << '}';
    return o.str();
}

} // namespace

std::string serialize_trace(const event_trace& tr) {
    std::ostringstream o;
    o << "{\"ev\":\"meta\",\"peers\":[";
    for (std::size_t i = 0; i < tr.peers.size(); ++i)
        o << (i ? "," : "") << '"' << json_escape(tr.peers[i]) << '"';
    o << "],\"budgets\":{";
    bool first = true;
    for (const auto& [a, b] : tr.budgets) {
        o << (first ? "" : ",") << '"' << json_escape(a) << "\":" << b;
        first = false;
    }
    o << "},\"horizon\":" << tr.horizon << ",\"k\":" << tr.k << "}\n";
    for (const auto& e : tr.events) o << serialize_event(e) << '\n';
    return o.str();
}

event_trace parse_trace(const std::string& text) {
    event_trace tr;
    std::istringstream in(text);
    std::string line;
    bool saw_meta = false;
    long long n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            fail(errc::parse_error, "trace line " + std::to_string(n) + " is not json");

        std::string ev = j.value("ev", "");
        if (ev == "meta") {
            for (const auto& p : j.value("peers", nlohmann::json::array()))
                tr.peers.push_back(p.get<std::string>());
            // .items() must run on a named object: calling it on the value()
            // temporary leaves the proxy iterating freed storage
            const auto budgets = j.value("budgets", nlohmann::json::object());
            for (const auto& [a, b] : budgets.items())
                tr.budgets[a] = b.get<long long>();
            tr.horizon = j.value("horizon", 0LL);
            tr.k = j.value("k", 1LL);
            saw_meta = true;
            continue;
        }

        event e;
        e.t = j.value("t", 0LL);
        if (ev == "send" || ev == "deliver") {
            e.kind = ev == "send" ? ev_kind::send : ev_kind::deliver;
            e.a = j.value("from", "");
            e.b = j.value("to", "");
            e.field = j.value("field", "");
            e.mid = j.value("mid", 0LL);
            e.detail = j.value("kind", "");
            e.round = j.value("round", 0LL);
            e.err = j.value("err", -1.0);
        } else if (ev == "decline") {
            e.kind = ev_kind::decline;
            e.a = j.value("from", "");
            e.b = j.value("to", "");
            e.field = j.value("field", "");
            e.mid = j.value("mid", 0LL);
            e.detail = j.value("reason", "");
            e.round = j.value("round", 0LL);
        } else if (ev == "timeout") {
            e.kind = ev_kind::timeout;
            e.a = j.value("owner", "");
            e.b = j.value("target", "");
            e.field = j.value("field", "");
            e.mid = j.value("mid", 0LL);
            e.round = j.value("round", 0LL);
        } else if (ev == "fusion") {
            e.kind = ev_kind::fusion;
            e.a = j.value("owner", "");
            e.field = j.value("field", "");
            e.b = j.value("winner", "");
            e.err = j.value("err", -1.0);
            e.round = j.value("round", 0LL);
        } else if (ev == "table") {
            e.kind = ev_kind::table;
            e.a = j.value("owner", "");
            e.field = j.value("field", "");
            e.b = j.value("agent", "");
            e.count = j.value("count", 0LL);
        } else if (ev == "mode") {
            e.kind = ev_kind::mode;
            e.a = j.value("agent", "");
            e.detail = j.value("mode", "");
        } else if (ev == "hint") {
            e.kind = ev_kind::hint;
            e.a = j.value("owner", "");
            e.field = j.value("field", "");
            e.b = j.value("agent", "");
        } else {
            fail(errc::parse_error,
                 "trace line " + std::to_string(n) + " has unknown ev '" + ev + "'");
        }
        tr.events.push_back(std::move(e));
    }
    if (!saw_meta) fail(errc::parse_error, "trace has no meta line");
    return tr;
}

// --- projections ----------------------------------------------------------

table_snapshots project_tables(const event_trace& tr, tick t) {
    table_snapshots s;
    for (const auto& p : tr.peers) {
        s.best0[p] = 0;
        s.remaining[p] = tr.budgets.count(p) ? tr.budgets.at(p) : 0;
        s.best[p].owner = p;
    }
    s.best[omega_id()].owner = omega_id();

    for (const auto& e : tr.events) {
        if (e.t > t) break; // events are time ordered
        if (e.kind == ev_kind::send && s.remaining.count(e.a)) {
            s.remaining[e.a] -= 1;
        } else if (e.kind == ev_kind::table) {
            s.best[e.a].counts[{e.field, e.b}] = e.count;
            if (e.a == omega_id() && e.field == message_field() && s.best0.count(e.b))
                s.best0[e.b] = e.count;
        }
    }
    return s;
}

namespace {

// walk ticks [from, to], applying events lazily and emitting one row each
template <typename Apply, typename Row>
std::string tick_csv(const event_trace& tr, tick from, tick to,
                     const std::string& header, Apply&& apply, Row&& row) {
    std::ostringstream out;
    out << header << '\n';
    std::size_t i = 0;
    for (tick t = from; t <= to; ++t) {
        while (i < tr.events.size() && tr.events[i].t <= t) apply(tr.events[i++]);
        out << t;
        row(out);
        out << '\n';
    }
    return out.str();
}

} // namespace

std::string csv_best0(const event_trace& tr, tick from, tick to) {
    std::string header = "t";
    for (const auto& p : tr.peers) header += "," + p;
    std::map<agent_id, long long> cell;
    for (const auto& p : tr.peers) cell[p] = 0;
    return tick_csv(
        tr, from, to, header,
        [&](const event& e) {
            if (e.kind == ev_kind::table && e.a == omega_id() &&
                e.field == message_field() && cell.count(e.b))
                cell[e.b] = e.count;
        },
        [&](std::ostringstream& out) {
            for (const auto& p : tr.peers) out << ',' << cell.at(p);
        });
}

std::string csv_remaining(const event_trace& tr, tick from, tick to) {
    std::string header = "t";
    for (const auto& p : tr.peers) header += "," + p;
    std::map<agent_id, long long> left;
    for (const auto& p : tr.peers)
        left[p] = tr.budgets.count(p) ? tr.budgets.at(p) : 0;
    return tick_csv(
        tr, from, to, header,
        [&](const event& e) {
            if (e.kind == ev_kind::send && left.count(e.a)) left[e.a] -= 1;
        },
        [&](std::ostringstream& out) {
            for (const auto& p : tr.peers) out << ',' << left.at(p);
        });
}

std::string csv_best(const event_trace& tr, tick from, tick to) {
    // columns: every peer-table cell the run ever touched, sorted
    std::set<std::tuple<agent_id, field_id, agent_id>> cols;
    for (const auto& e : tr.events)
        if (e.kind == ev_kind::table && e.a != omega_id())
            cols.insert({e.a, e.field, e.b});

    std::string header = "t";
    for (const auto& [owner, f, a] : cols) header += "," + owner + "." + f + "." + a;
    std::map<std::tuple<agent_id, field_id, agent_id>, long long> cell;
    for (const auto& c : cols) cell[c] = 0;
    return tick_csv(
        tr, from, to, header,
        [&](const event& e) {
            if (e.kind == ev_kind::table && e.a != omega_id())
                cell[{e.a, e.field, e.b}] = e.count;
        },
        [&](std::ostringstream& out) {
            for (const auto& c : cols) out << ',' << cell.at(c);
        });
}

std::string export_tables(const event_trace& tr, tick from, tick to) {
    std::string out = "[best0]\n" + csv_best0(tr, from, to);
    out += "\n[best]\n" + csv_best(tr, from, to);
    out += "\n[remaining]\n" + csv_remaining(tr, from, to);
    return out;
}

csv_diff compare_csv(const std::string& expected, const std::string& actual) {
    std::istringstream ein(expected), ain(actual);
    std::string el, al;
    long long n = 0;
    while (true) {
        bool more_e = static_cast<bool>(std::getline(ein, el));
        bool more_a = static_cast<bool>(std::getline(ain, al));
        ++n;
        if (!more_e && !more_a) return {};
        if (!more_e) el = "<eof>";
        if (!more_a) al = "<eof>";
        if (el != al) return {false, n, el, al};
        if (!more_e || !more_a) return {false, n, el, al};
    }
}

} // namespace holosim
