#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricex/pricing.hpp"
#include "pricex/rng.hpp"

namespace pricex {

// A consumer. `group_id` is the demographic attribute the pricing algorithm
// keys on; `offered_price` is what the market quotes this agent. Disutility
// parameters describe the agent's per-interaction hassle-cost distribution.
// Buyer capacity is always 1; `intermediary_capacity` is the shared k.
struct Agent {
    int id = 0;
    int group_id = 0;
    double offered_price = 0.0;
    double disutility_mean = 0.0;
    double disutility_sd = 0.0;
    int intermediary_capacity = 0;
};

struct Population {
    std::vector<Agent> agents;
    double gamma = 0.0;                  // system's cut of each transaction
    std::vector<std::vector<int>> groups; // non-empty groups, ascending group_id

    int size() const { return static_cast<int>(agents.size()); }

    double min_price() const {
        double m = 1e300;
        for (const auto& a : agents) m = std::min(m, a.offered_price);
        return m;
    }

    void rebuild_groups() {
        groups.clear();
        int max_gid = 0;
        for (const auto& a : agents) max_gid = std::max(max_gid, a.group_id);
        std::vector<std::vector<int>> by_gid(max_gid + 1);
        for (const auto& a : agents) by_gid[a.group_id].push_back(a.id);
        for (auto& g : by_gid)
            if (!g.empty()) groups.push_back(std::move(g));
    }
};

// Utilities realized by the two sides of one interaction at transaction
// price m, together with the disutility draws that produced them.
struct UtilityPair {
    double buyer_utility = 0.0;
    double intermediary_utility = 0.0;
    double buyer_disutility_draw = 0.0;
    double intermediary_disutility_draw = 0.0;
};

// Builds the agent collective. Groups are assigned round-robin so sizes
// differ by at most one. Disutility distributions follow the reference
// experiment setup: mean ~ U(0, 0.02 * unit) and sd = 0.01 * unit, both
// multiplied by `disutility_scale`; scale 0 gives the zero-disutility regime.
inline Population generate_population(int count, const PricingModel& model, double gamma,
                                      int capacity, double disutility_scale, Rng& rng) {
    if (count < 2)
        throw std::invalid_argument("generate_population: need at least 2 agents, got " +
                                    std::to_string(count));
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("generate_population: gamma must lie in [0, 1), got " +
                                    std::to_string(gamma));
    if (capacity < 0)
        throw std::invalid_argument("generate_population: capacity must be >= 0");

    const int num_groups = static_cast<int>(model.groups.size());
    const double unit = model.disutility_unit;

    Population pop;
    pop.gamma = gamma;
    pop.agents.reserve(count);
    for (int i = 0; i < count; ++i) {
        Agent a;
        a.id = i;
        a.group_id = model.groups[i % num_groups].group_id;
        a.offered_price = sample_price(model, a.group_id, rng);
        a.disutility_mean = rng.uniform(0.0, 0.02 * unit) * disutility_scale;
        a.disutility_sd = 0.01 * unit * disutility_scale;
        a.intermediary_capacity = capacity;
        pop.agents.push_back(a);
    }
    pop.rebuild_groups();
    return pop;
}

// One hassle-cost draw for an interaction; distinct interactions get fresh
// draws. Truncated below at zero.
inline double draw_disutility(const Agent& agent, Rng& rng) {
    return rng.truncated_normal_nonneg(agent.disutility_mean, agent.disutility_sd);
}

// f_buyer = p_u - m - eps_u, f_intermediary = m(1-gamma) - p_v - eps_v.
inline UtilityPair evaluate_utilities(const Agent& buyer, const Agent& intermediary, double m,
                                      double gamma, double eps_buyer, double eps_intermediary) {
    if (buyer.offered_price <= intermediary.offered_price)
        throw std::invalid_argument("evaluate_utilities: buyer price must exceed intermediary price");
    UtilityPair u;
    u.buyer_disutility_draw = eps_buyer;
    u.intermediary_disutility_draw = eps_intermediary;
    u.buyer_utility = buyer.offered_price - m - eps_buyer;
    u.intermediary_utility = m * (1.0 - gamma) - intermediary.offered_price - eps_intermediary;
    return u;
}

} // namespace pricex
