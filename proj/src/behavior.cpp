#include "holosim/behavior.hpp"

#include <algorithm>
#include <cmath>

namespace holosim {

bool decide_query(const agent_state& agent, const field_id& field,
                  const field_schema& schema, rng& r) {
    if (!schema.compound(field))
        fail(errc::unknown_field, field + " is not a compound field");
    double err = agent.profile.error_for(field);
    return r.bernoulli(err); // P(query) = 1 - quality = error
}

std::vector<agent_id> select_recipients(const agent_state& agent,
                                        const field_id& field,
                                        const std::vector<agent_id>& peers,
                                        const std::vector<agent_id>& parent_chain) {
    std::vector<agent_id> candidates;
    for (const auto& p : peers) {
        if (p == agent.id) continue;
        if (std::find(parent_chain.begin(), parent_chain.end(), p) != parent_chain.end())
            continue;
        if (agent.known_exhausted.count(p)) continue;
        candidates.push_back(p);
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.empty()) return candidates;

    long long max = agent.best.max_count(field, candidates);
    if (max == 0) return candidates; // discovery: broadcast

    // walk tiers of strictly decreasing count; the 0 tier is broadcast
    while (max > 0) {
        std::vector<agent_id> tier;
        long long next = 0;
        for (const auto& p : candidates) {
            long long c = agent.best.count(field, p);
            if (c == max) tier.push_back(p);
            else if (c < max) next = std::max(next, c);
        }
        if (!tier.empty()) return tier;
        max = next;
    }
    std::vector<agent_id> floor;
    for (const auto& p : candidates)
        if (agent.best.count(field, p) == 0) floor.push_back(p);
    return floor;
}

decision_draws rng_draws(rng& r) {
    decision_draws d;
    d.lottery = [&r]() { return r.below(2) == 0; };
    d.anneal = [&r](double p) { return r.bernoulli(p); };
    return d;
}

answer_decision decide_answer(const agent_state& responder, const field_id& field,
                              double querier_error, tick t, const sim_config& cfg,
                              const decision_draws& draws) {
    if (!responder.unlimited_budget && responder.remaining_messages <= 0)
        return {answer_verdict::decline_no_budget, -1};

    double own = responder.profile.error_for(field);

    bool under = !responder.unlimited_budget &&
                 responder.remaining_messages <
                     cfg.lottery_threshold_pct * responder.initial_budget;
    if (under && !draws.lottery())
        return {answer_verdict::decline_lottery, -1};

    if (own < querier_error) return {answer_verdict::answer, own};

    // worse (or equal) quality: only an annealed acceptance answers anyway
    if (cfg.anneal_p0 > 0 && responder.mode != agent_mode::intelligent) {
        double p = cfg.anneal_p0 * std::exp(-static_cast<double>(t) / cfg.tau());
        if (draws.anneal(p)) return {answer_verdict::answer, own};
    }
    return {answer_verdict::decline_lower_quality, -1};
}

fusion_result fuse_responses(double own_error,
                             const std::vector<std::pair<agent_id, double>>& responses) {
    fusion_result best{std::nullopt, own_error};
    for (const auto& [agent, err] : responses) {
        bool better = err < best.error;
        bool tie = err == best.error && best.winner.has_value() && agent < *best.winner;
        if (better || tie) best = {agent, err};
    }
    return best;
}

void record_outcome(best_table& best, const field_id& field,
                    const fusion_result& fused, const agent_id& owner) {
    const agent_id& who = fused.winner ? *fused.winner : owner;
    best.counts[{field, who}] += 1;
}

void check_mode_switch(agent_state& agent, const sim_config& cfg) {
    if (agent.mode == agent_mode::intelligent) return; // sticky
    if (agent.total_timeouts() >= cfg.timeout_switch_threshold)
        agent.mode = agent_mode::intelligent;
}

checkin_result handle_checkin(const agent_state& agent, const agent_id& newcomer,
                              const std::vector<agent_id>& peers, const sim_config& cfg) {
    if (newcomer == agent.id ||
        std::find(peers.begin(), peers.end(), newcomer) != peers.end())
        fail(errc::duplicate_peer, newcomer + " is already a peer");
    return agent.remaining_messages >= cfg.checkin_threshold ? checkin_result::accept
                                                             : checkin_result::reject;
}

} // namespace holosim
