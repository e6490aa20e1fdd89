#pragma once

#include <functional>
#include <optional>

#include "holosim/model.hpp"
#include "holosim/rng.hpp"

namespace holosim {

enum class answer_verdict {
    answer,
    decline_lower_quality,
    decline_no_budget,
    decline_lottery,
    decline_scripted,
};

struct answer_decision {
    answer_verdict verdict = answer_verdict::decline_no_budget;
    double error = -1; // responder's profile error, answers only
};

// should `agent` forward a query about a compound field it was asked about?
// true with probability equal to its own error for the field (one rng draw).
bool decide_query(const agent_state& agent, const field_id& field,
                  const field_schema& schema, rng& r);

// tiered recipient selection. candidates = peers minus self minus the parent
// chain, filtered to those not known-exhausted. with no positive count the
// whole tier is the broadcast floor; otherwise the equal-max tier, falling
// back tier by tier ("next in sequence of frequencies") down to broadcast.
// never mixes tiers; returns ids sorted; may be empty (caller decides).
std::vector<agent_id> select_recipients(const agent_state& agent,
                                        const field_id& field,
                                        const std::vector<agent_id>& peers,
                                        const std::vector<agent_id>& parent_chain);

// hooks let the engine substitute scripted draws for rng ones
struct decision_draws {
    std::function<bool()> lottery;            // true = pass (send anyway)
    std::function<bool(double)> anneal;       // true = answer despite quality
};

decision_draws rng_draws(rng& r);

// gate order: budget -> lottery (only under the budget-percentage line) ->
// strict quality -> annealing. the scripted path replaces `draws`.
answer_decision decide_answer(const agent_state& responder, const field_id& field,
                              double querier_error, tick t, const sim_config& cfg,
                              const decision_draws& draws);

// winner of a fusion: argmin error over own estimate and the responses.
// ties: self wins, then lowest agent id.
struct fusion_result {
    std::optional<agent_id> winner; // nullopt = self
    double error = 1.0;
};

fusion_result fuse_responses(double own_error,
                             const std::vector<std::pair<agent_id, double>>& responses);

// bump the winner's cell; self maps to the owner's own id
void record_outcome(best_table& best, const field_id& field,
                    const fusion_result& fused, const agent_id& owner);

// sticky switch into economy mode once total timeouts reach the threshold
void check_mode_switch(agent_state& agent, const sim_config& cfg);

enum class checkin_result { accept, reject };

// a peer below the budget threshold does not recognize a newcomer
checkin_result handle_checkin(const agent_state& agent, const agent_id& newcomer,
                              const std::vector<agent_id>& peers, const sim_config& cfg);

} // namespace holosim
