#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricex/market.hpp"
#include "pricex/matching.hpp"
#include "pricex/rng.hpp"

namespace pricex {

enum class PriceMode { centralized, decentralized };

inline const char* label_of(PriceMode m) {
    return m == PriceMode::centralized ? "centralized" : "decentralized";
}

inline PriceMode mode_from_label(const std::string& label) {
    if (label == "centralized") return PriceMode::centralized;
    if (label == "decentralized") return PriceMode::decentralized;
    throw std::invalid_argument("unknown mode '" + label +
                                "'; expected centralized or decentralized");
}

// A trade that actually happened: both realized utilities were strictly
// positive at this m and these disutility draws.
struct ExecutedTrade {
    int buyer = 0;
    int intermediary = 0;
    double m = 0.0;
    double buyer_disutility = 0.0;
    double intermediary_disutility = 0.0;
};

struct LedgerOutcome {
    std::vector<ExecutedTrade> trades;
    std::vector<double> net_costs;
    double system_revenue = 0.0;
    PriceMode mode = PriceMode::centralized;
};

// Transaction price maximizing the product of the two welfare gains
// (p_u - m - eps_u) * (m(1-gamma) - p_v - eps_v). The product is a downward
// parabola in m with roots a = p_u - eps_u and b = (p_v + eps_v)/(1-gamma),
// so the maximizer is the midpoint; an agreement exists iff both factors are
// strictly positive there, i.e. iff a > b.
inline std::optional<double> nash_bargaining_price(double p_u, double p_v, double eps_u,
                                                   double eps_v, double gamma) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("nash_bargaining_price: gamma must lie in [0, 1)");
    const double a = p_u - eps_u;
    const double b = (p_v + eps_v) / (1.0 - gamma);
    if (a <= b) return std::nullopt;
    return 0.5 * (a + b);
}

// Hassle-cost draws for both sides of each proposed interaction, in plan
// order. Kept separate from execution so one set of draws can price both the
// centralized and the decentralized settlement of the same plan.
inline std::vector<std::pair<double, double>>
draw_interaction_disutilities(const CentralPlan& plan, const Population& pop, Rng& rng) {
    std::vector<std::pair<double, double>> draws;
    draws.reserve(plan.interactions.size());
    for (const auto& j : plan.interactions) {
        double eb = draw_disutility(pop.agents[j.buyer], rng);
        double ei = draw_disutility(pop.agents[j.intermediary], rng);
        draws.emplace_back(eb, ei);
    }
    return draws;
}

namespace detail {

inline void check_plan_against_population(const CentralPlan& plan, const Population& pop) {
    const int n = pop.size();
    for (const auto& j : plan.interactions) {
        if (j.buyer < 0 || j.buyer >= n || j.intermediary < 0 || j.intermediary >= n)
            throw std::invalid_argument("execute_plan: interaction references unknown agent");
        if (pop.agents[j.buyer].offered_price <= pop.agents[j.intermediary].offered_price)
            throw std::invalid_argument("execute_plan: interaction direction violates prices");
    }
    check_capacities(plan.interactions, pop);
}

} // namespace detail

// Settles and executes a plan with explicit disutility draws. Centralized
// settlement keeps the proposed m, which each pair accepts only if both
// utilities are strictly positive; decentralized settlement replaces m with
// the Nash bargaining price and executes exactly when an agreement exists.
// Buyers without an executed trade pay their offered price.
inline LedgerOutcome execute_plan_with_draws(const CentralPlan& plan, const Population& pop,
                                             PriceMode mode,
                                             const std::vector<std::pair<double, double>>& draws) {
    detail::check_plan_against_population(plan, pop);
    if (draws.size() != plan.interactions.size())
        throw std::invalid_argument("execute_plan: draw count does not match plan");

    LedgerOutcome out;
    out.mode = mode;
    const double gamma = pop.gamma;

    for (std::size_t i = 0; i < plan.interactions.size(); ++i) {
        const Interaction& j = plan.interactions[i];
        const auto& [eps_b, eps_i] = draws[i];
        const Agent& buyer = pop.agents[j.buyer];
        const Agent& inter = pop.agents[j.intermediary];

        bool executed = false;
        double m = j.proposed_m;
        if (mode == PriceMode::centralized) {
            UtilityPair u = evaluate_utilities(buyer, inter, m, gamma, eps_b, eps_i);
            executed = u.buyer_utility > 0.0 && u.intermediary_utility > 0.0;
        } else {
            auto agreed = nash_bargaining_price(buyer.offered_price, inter.offered_price, eps_b,
                                                eps_i, gamma);
            if (agreed) {
                m = *agreed;
                executed = true;
            }
        }
        if (executed) {
            out.trades.push_back({j.buyer, j.intermediary, m, eps_b, eps_i});
            out.system_revenue += gamma * m;
        }
    }

    out.net_costs.resize(pop.agents.size());
    for (const auto& a : pop.agents) out.net_costs[a.id] = a.offered_price;
    for (const auto& t : out.trades) out.net_costs[t.buyer] = t.m;
    for (const auto& t : out.trades)
        out.net_costs[t.intermediary] -=
            t.m * (1.0 - gamma) - pop.agents[t.intermediary].offered_price;
    return out;
}

inline LedgerOutcome execute_plan(const CentralPlan& plan, const Population& pop, PriceMode mode,
                                  Rng& rng) {
    auto draws = draw_interaction_disutilities(plan, pop, rng);
    return execute_plan_with_draws(plan, pop, mode, draws);
}

// Net cost to one agent given the executed trades: what it paid for its own
// good (m if bought through a trade, its offered price otherwise) minus the
// profit from every trade it brokered. Negative means net gain.
inline double net_cost_of(const Agent& agent, const std::vector<ExecutedTrade>& trades,
                          const Population& pop) {
    double cost = agent.offered_price;
    for (const auto& t : trades)
        if (t.buyer == agent.id) cost = t.m;
    for (const auto& t : trades)
        if (t.intermediary == agent.id)
            cost -= t.m * (1.0 - pop.gamma) - agent.offered_price;
    return cost;
}

} // namespace pricex
