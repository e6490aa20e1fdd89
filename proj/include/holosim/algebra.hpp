#pragma once

#include "holosim/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace holosim {

// finite-automaton agent: states / percepts / actions are 0-based index
// ranges, activity is a total table (s, p) -> (s', a) stored row-major by
// state. Small on purpose - these exist to be enumerated exhaustively.
struct abstract_agent {
    int ns = 1;
    int np = 1;
    int na = 1;
    std::vector<std::pair<int, int>> phi; // ns*np entries

    std::pair<int, int> act(int s, int p) const {
        return phi[static_cast<std::size_t>(s) * static_cast<std::size_t>(np) +
                   static_cast<std::size_t>(p)];
    }
};

bool operator==(const abstract_agent& a, const abstract_agent& b);

void validate_agent(const abstract_agent& a);

// composite agent over a shared pool of atomic ones, held in canonical form:
// the sorted, duplicate-free list of member indices. Equality on this form is
// what makes composition literally commutative and associative.
struct holon_agent {
    std::vector<int> members;
};

bool operator==(const holon_agent& a, const holon_agent& b);

holon_agent neutral();
holon_agent singleton(int member);
holon_agent compose(const holon_agent& a, const holon_agent& b);

// product automaton over the canonical member order; the neutral composite
// materializes as the one-state do-nothing agent
abstract_agent materialize(const std::vector<abstract_agent>& pool,
                           const holon_agent& h);

// closed toy system: an environment index plus one state index per agent.
// perceive[e][i] is agent i's percept in env state e; delta[e][j] is the next
// env state for joint action j (mixed radix over the agents' action counts).
struct toy_mas {
    int ne = 1;
    std::vector<abstract_agent> agents;
    std::vector<std::vector<int>> perceive;
    std::vector<std::vector<int>> delta;
};

void validate_mas(const toy_mas& m);

// number of global states (env * all agent states); enumeration beyond the
// cap is refused rather than attempted
long long count_global_states(const toy_mas& m);

long long encode_global(const toy_mas& m, int e, const std::vector<int>& s);
std::pair<int, std::vector<int>> decode_global(const toy_mas& m, long long g);

// synchronous step of the whole system: every agent fires phi on its state
// and percept, then the environment moves on the joint action
std::pair<int, std::vector<int>> step_mas(const toy_mas& m, int e,
                                          const std::vector<int>& s);

struct collapse_result {
    toy_mas collapsed;          // fused agent first, the rest in original order
    std::vector<long long> psi; // old global index -> new global index
    std::vector<int> subset;    // sorted indices that were fused
};

// replace the agents named by `subset` with their product automaton; psi is
// the induced bijection on global states
collapse_result collapse_system(const toy_mas& m, const std::vector<int>& subset);

struct iso_report {
    bool ok = true;
    long long state = -1; // first global state of `a` violating the square
    std::string detail;
};

// checks psi . step_a == step_b . psi over every global state, and that psi
// is a bijection to begin with
iso_report verify_isomorphism(const toy_mas& a, const toy_mas& b,
                              const std::vector<long long>& psi);

// randomized small instances for the property tests
abstract_agent random_agent(rng& r, int max_states, int max_percepts,
                            int max_actions);
toy_mas random_mas(rng& r, int max_agents, int max_states, int max_env);

} // namespace holosim
