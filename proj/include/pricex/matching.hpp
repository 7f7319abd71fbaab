#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricex/fairness.hpp"
#include "pricex/market.hpp"
#include "pricex/min_cost_flow.hpp"

namespace pricex {

enum class Objective { mu_individual, mu_group, sigma_individual, sigma_group };

inline bool is_mean_objective(Objective o) {
    return o == Objective::mu_individual || o == Objective::mu_group;
}

inline bool is_group_scope(Objective o) {
    return o == Objective::mu_group || o == Objective::sigma_group;
}

inline const char* label_of(Objective o) {
    switch (o) {
        case Objective::mu_individual: return "mu_I";
        case Objective::mu_group: return "mu_G";
        case Objective::sigma_individual: return "sigma_I";
        case Objective::sigma_group: return "sigma_G";
    }
    return "?";
}

inline Objective objective_from_label(const std::string& label) {
    if (label == "mu_I") return Objective::mu_individual;
    if (label == "mu_G") return Objective::mu_group;
    if (label == "sigma_I") return Objective::sigma_individual;
    if (label == "sigma_G") return Objective::sigma_group;
    throw std::invalid_argument("unknown objective '" + label +
                                "'; expected one of mu_I, mu_G, sigma_I, sigma_G");
}

inline double metric_value(const FairnessReport& r, Objective o) {
    switch (o) {
        case Objective::mu_individual: return r.mu_individual;
        case Objective::mu_group: return r.mu_group;
        case Objective::sigma_individual: return r.sigma_individual;
        case Objective::sigma_group: return r.sigma_group;
    }
    return 0.0;
}

// Directed trade graph: (u, v) is an edge iff p_u > p_v. Equal prices give
// no edge, so the graph is acyclic.
struct TradeGraph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> out; // out[u] = intermediary candidates, ascending
};

inline TradeGraph build_trade_graph(const Population& pop) {
    TradeGraph g;
    g.node_count = pop.size();
    g.out.resize(pop.agents.size());
    for (const auto& u : pop.agents)
        for (const auto& v : pop.agents)
            if (u.offered_price > v.offered_price) {
                g.edges.emplace_back(u.id, v.id);
                g.out[u.id].push_back(v.id);
            }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

// One proposed interaction: buyer pays proposed_m to the intermediary.
struct Interaction {
    int buyer = 0;
    int intermediary = 0;
    double proposed_m = 0.0;
};

struct CentralPlan {
    std::vector<Interaction> interactions;
    Objective objective = Objective::mu_individual;
    double objective_value = 0.0;
};

// Feasible transaction-price window for an edge: the intermediary must
// recover its own price net of the system cut, the buyer must not overpay.
inline std::pair<double, double> m_bounds(const Agent& buyer, const Agent& intermediary,
                                          double gamma) {
    return {intermediary.offered_price / (1.0 - gamma), buyer.offered_price};
}

// Per-agent coefficient of omega_u in the objective: 1/|V| at individual
// scope, 1/(|G| * |g_u|) at group scope.
inline std::vector<double> objective_weights(const Population& pop, Objective obj) {
    const int n = pop.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (is_group_scope(obj)) {
        const double num_groups = static_cast<double>(pop.groups.size());
        for (const auto& g : pop.groups)
            for (int id : g) w[id] = 1.0 / (num_groups * static_cast<double>(g.size()));
    }
    return w;
}

struct EdgeValue {
    double best_m = 0.0;
    double weight = 0.0; // objective decrease from selecting the edge; NaN for sigma objectives
};

// For a mean objective the per-edge contribution is linear in m, so the best
// m sits at an interval endpoint: the m-coefficient is
// w_buyer - w_intermediary*(1-gamma); positive coefficient pushes m to the
// lower bound, negative to the upper, ties to the lower. The returned weight
// is the objective decrease; an empty feasible interval always yields
// weight <= 0. Sigma objectives get the interval midpoint as a heuristic
// seed and no weight.
inline EdgeValue edge_value(const Agent& buyer, const Agent& intermediary, const Population& pop,
                            Objective obj) {
    const double gamma = pop.gamma;
    auto [lb, ub] = m_bounds(buyer, intermediary, gamma);
    if (!is_mean_objective(obj))
        return {0.5 * (lb + ub), std::numeric_limits<double>::quiet_NaN()};

    const std::vector<double> w = objective_weights(pop, obj);
    const double wu = w[buyer.id];
    const double wv = w[intermediary.id];
    const double coeff = wu - wv * (1.0 - gamma);
    const double m = coeff >= 0.0 ? lb : ub;
    const double weight = wu * buyer.offered_price - wv * intermediary.offered_price - m * coeff;
    return {m, weight};
}

// Net cost per agent if every interaction in the plan were executed:
// buyers pay m instead of their offered price, intermediaries subtract the
// profit of each sale they broker, everyone else pays their offered price.
inline std::vector<double> plan_net_costs(const std::vector<Interaction>& interactions,
                                          const Population& pop) {
    const double gamma = pop.gamma;
    std::vector<double> cost(pop.agents.size());
    for (const auto& a : pop.agents) cost[a.id] = a.offered_price;
    for (const auto& j : interactions) cost[j.buyer] = j.proposed_m;
    for (const auto& j : interactions)
        cost[j.intermediary] -=
            j.proposed_m * (1.0 - gamma) - pop.agents[j.intermediary].offered_price;
    return cost;
}

inline double plan_objective_value(const std::vector<Interaction>& interactions,
                                   const Population& pop, Objective obj) {
    return metric_value(fairness_metrics(plan_net_costs(interactions, pop), pop.groups), obj);
}

namespace detail {

constexpr double kWeightEps = 1e-15;

inline void check_capacities(const std::vector<Interaction>& interactions, const Population& pop) {
    std::vector<int> as_buyer(pop.agents.size(), 0), as_int(pop.agents.size(), 0);
    for (const auto& j : interactions) {
        ++as_buyer[j.buyer];
        ++as_int[j.intermediary];
    }
    for (const auto& a : pop.agents) {
        if (as_buyer[a.id] > 1)
            throw std::logic_error("plan exceeds buyer capacity at agent " + std::to_string(a.id));
        if (as_int[a.id] > a.intermediary_capacity)
            throw std::logic_error("plan exceeds intermediary capacity at agent " +
                                   std::to_string(a.id));
    }
}

} // namespace detail

// Exact solve of the mean-objective relaxation. Per-edge optimal m values
// reduce the problem to max-weight b-matching (buyer side capacity 1,
// intermediary side capacity k), solved as min-cost flow on the bipartite
// split graph with profit-maximal augmentation.
inline CentralPlan solve_linear_centralized(const TradeGraph& graph, const Population& pop,
                                            Objective obj) {
    if (!is_mean_objective(obj))
        throw std::invalid_argument("solve_linear_centralized: objective must be mu_I or mu_G");

    const int n = pop.size();
    const int source = 0, sink = 1 + 2 * n;
    MinCostFlow flow(2 * n + 2);

    struct UsableEdge {
        int buyer, intermediary, arc;
        double m;
    };
    std::vector<UsableEdge> usable;
    std::vector<char> buyer_attached(n, 0), int_attached(n, 0);
    for (const auto& [u, v] : graph.edges) {
        auto [lb, ub] = m_bounds(pop.agents[u], pop.agents[v], pop.gamma);
        if (lb > ub) continue;
        EdgeValue ev = edge_value(pop.agents[u], pop.agents[v], pop, obj);
        if (ev.weight <= detail::kWeightEps) continue;
        if (!buyer_attached[u]) {
            flow.add_arc(source, 1 + u, 1, 0.0);
            buyer_attached[u] = 1;
        }
        if (!int_attached[v]) {
            flow.add_arc(1 + n + v, sink, pop.agents[v].intermediary_capacity, 0.0);
            int_attached[v] = 1;
        }
        int arc = flow.add_arc(1 + u, 1 + n + v, 1, -ev.weight);
        usable.push_back({u, v, arc, ev.best_m});
    }

    flow.solve_profit_maximal(source, sink);

    CentralPlan plan;
    plan.objective = obj;
    for (const auto& e : usable)
        if (flow.flow_on(e.arc) > 0) plan.interactions.push_back({e.buyer, e.intermediary, e.m});
    std::sort(plan.interactions.begin(), plan.interactions.end(),
              [](const Interaction& a, const Interaction& b) { return a.buyer < b.buyer; });
    plan.objective_value = plan_objective_value(plan.interactions, pop, obj);
    return plan;
}

namespace detail {

// Exact per-coordinate minimization of the variance objective over the m
// box. The objective restricted to one m coordinate is a convex parabola:
// Var(y + t*d) = Var(y) + 2t*Cov(y,d) + t^2*Var(d) with d the (sparse)
// sensitivity of the analysis vector y to that coordinate. Cyclic passes
// with clamping converge to the global minimum for the fixed matching.
class VarianceDescent {
public:
    VarianceDescent(const Population& pop, bool group_scope)
        : pop_(pop), group_scope_(group_scope) {
        const int n = pop.size();
        group_of_.resize(n);
        group_size_.resize(pop.groups.size());
        for (std::size_t gi = 0; gi < pop.groups.size(); ++gi) {
            group_size_[gi] = static_cast<double>(pop.groups[gi].size());
            for (int id : pop.groups[gi]) group_of_[id] = static_cast<int>(gi);
        }
    }

    // Optimizes the m values in place; returns the sigma objective value.
    double optimize(std::vector<Interaction>& interactions, double tol = 1e-12,
                    int max_passes = 2000) {
        const double gamma = pop_.gamma;
        const double one_minus_gamma = 1.0 - gamma;
        const int n = pop_.size();

        std::vector<double> omega = plan_net_costs(interactions, pop_);
        std::vector<double> lb(interactions.size()), ub(interactions.size());
        for (std::size_t i = 0; i < interactions.size(); ++i) {
            auto b = m_bounds(pop_.agents[interactions[i].buyer],
                              pop_.agents[interactions[i].intermediary], gamma);
            lb[i] = b.first;
            ub[i] = b.second;
        }

        const std::size_t num_groups = pop_.groups.size();
        std::vector<double> group_sum(num_groups, 0.0);
        for (int id = 0; id < n; ++id) group_sum[group_of_[id]] += omega[id];

        double omega_sum = 0.0;
        for (double w : omega) omega_sum += w;

        // Var(d) at individual scope is the same for every coordinate.
        const double var_d_individual =
            (1.0 + one_minus_gamma * one_minus_gamma) / n - (gamma / n) * (gamma / n);

        for (int pass = 0; pass < max_passes; ++pass) {
            double max_move = 0.0;
            for (std::size_t i = 0; i < interactions.size(); ++i) {
                Interaction& j = interactions[i];
                const int u = j.buyer, v = j.intermediary;
                double cov, var_d;
                if (!group_scope_) {
                    const double mean_omega = omega_sum / n;
                    const double mean_d = gamma / n;
                    cov = (omega[u] - one_minus_gamma * omega[v]) / n - mean_omega * mean_d;
                    var_d = var_d_individual;
                } else {
                    const int gu = group_of_[u], gv = group_of_[v];
                    double du = 1.0 / group_size_[gu];
                    double dv = -one_minus_gamma / group_size_[gv];
                    double mean_means = 0.0;
                    for (std::size_t gi = 0; gi < num_groups; ++gi)
                        mean_means += group_sum[gi] / group_size_[gi];
                    mean_means /= static_cast<double>(num_groups);
                    double sum_yd, sum_d, sum_d2;
                    if (gu == gv) {
                        const double d = du + dv;
                        sum_yd = (group_sum[gu] / group_size_[gu]) * d;
                        sum_d = d;
                        sum_d2 = d * d;
                    } else {
                        sum_yd = (group_sum[gu] / group_size_[gu]) * du +
                                 (group_sum[gv] / group_size_[gv]) * dv;
                        sum_d = du + dv;
                        sum_d2 = du * du + dv * dv;
                    }
                    const double ng = static_cast<double>(num_groups);
                    const double mean_d = sum_d / ng;
                    cov = sum_yd / ng - mean_means * mean_d;
                    var_d = sum_d2 / ng - mean_d * mean_d;
                }
                if (var_d < 1e-18) continue;
                double target = j.proposed_m - cov / var_d;
                double clamped = std::clamp(target, lb[i], ub[i]);
                double delta = clamped - j.proposed_m;
                if (delta == 0.0) continue;
                j.proposed_m = clamped;
                omega[u] += delta;
                omega[v] -= delta * one_minus_gamma;
                omega_sum += delta * gamma;
                group_sum[group_of_[u]] += delta;
                group_sum[group_of_[v]] -= delta * one_minus_gamma;
                max_move = std::max(max_move, std::abs(delta));
            }
            if (max_move <= tol) break;
        }
        return sigma_of(interactions);
    }

    double sigma_of(const std::vector<Interaction>& interactions) const {
        FairnessReport r = fairness_metrics(plan_net_costs(interactions, pop_), pop_.groups);
        return group_scope_ ? r.sigma_group : r.sigma_individual;
    }

private:
    const Population& pop_;
    bool group_scope_;
    std::vector<int> group_of_;
    std::vector<double> group_size_;
};

} // namespace detail

// Budgeted heuristic for the standard-deviation objectives. Starts from the
// matching that is optimal for the corresponding mean objective with every m
// at its lower bound, then alternates exact convex minimization of the
// variance over the m box with first-improvement moves on the matching
// (add edge, drop edge, swap intermediary), re-optimizing m per candidate.
// `budget` caps the number of candidate-plan evaluations. The result is
// never worse than the no-trade plan.
inline CentralPlan solve_quadratic_centralized(const TradeGraph& graph, const Population& pop,
                                               Objective obj, long budget = 10000) {
    if (is_mean_objective(obj))
        throw std::invalid_argument("solve_quadratic_centralized: objective must be sigma_I or sigma_G");

    const Objective mean_obj =
        obj == Objective::sigma_individual ? Objective::mu_individual : Objective::mu_group;
    CentralPlan seed = solve_linear_centralized(graph, pop, mean_obj);
    for (auto& j : seed.interactions)
        j.proposed_m =
            m_bounds(pop.agents[j.buyer], pop.agents[j.intermediary], pop.gamma).first;

    CentralPlan plan;
    plan.objective = obj;
    plan.interactions = seed.interactions;
    if (budget <= 0) {
        plan.objective_value = plan_objective_value(plan.interactions, pop, obj);
        return plan;
    }

    detail::VarianceDescent descent(pop, is_group_scope(obj));
    double best_val = descent.optimize(plan.interactions);

    const int n = pop.size();
    std::vector<int> as_buyer(n), load(n);
    auto recount = [&](const std::vector<Interaction>& js) {
        std::fill(as_buyer.begin(), as_buyer.end(), 0);
        std::fill(load.begin(), load.end(), 0);
        for (const auto& j : js) {
            ++as_buyer[j.buyer];
            ++load[j.intermediary];
        }
    };

    long evals = 0;
    bool improved = true;
    while (improved && evals < budget) {
        improved = false;
        recount(plan.interactions);

        // try a candidate; accept on strict improvement
        auto consider = [&](std::vector<Interaction> cand) {
            ++evals;
            double val = descent.optimize(cand);
            if (val < best_val - 1e-12) {
                plan.interactions = std::move(cand);
                best_val = val;
                improved = true;
                return true;
            }
            return false;
        };

        // add
        for (const auto& [u, v] : graph.edges) {
            if (evals >= budget || improved) break;
            if (as_buyer[u] > 0 || load[v] >= pop.agents[v].intermediary_capacity) continue;
            auto [lb, ub] = m_bounds(pop.agents[u], pop.agents[v], pop.gamma);
            if (lb > ub) continue;
            std::vector<Interaction> cand = plan.interactions;
            cand.push_back({u, v, 0.5 * (lb + ub)});
            std::sort(cand.begin(), cand.end(),
                      [](const Interaction& a, const Interaction& b) { return a.buyer < b.buyer; });
            consider(std::move(cand));
        }
        // drop
        for (std::size_t i = 0; i < plan.interactions.size(); ++i) {
            if (evals >= budget || improved) break;
            std::vector<Interaction> cand = plan.interactions;
            cand.erase(cand.begin() + static_cast<long>(i));
            consider(std::move(cand));
        }
        // swap intermediary
        for (std::size_t i = 0; i < plan.interactions.size(); ++i) {
            if (evals >= budget || improved) break;
            const int u = plan.interactions[i].buyer;
            for (int v2 : graph.out[u]) {
                if (evals >= budget || improved) break;
                if (v2 == plan.interactions[i].intermediary) continue;
                if (load[v2] >= pop.agents[v2].intermediary_capacity) continue;
                auto [lb, ub] = m_bounds(pop.agents[u], pop.agents[v2], pop.gamma);
                if (lb > ub) continue;
                std::vector<Interaction> cand = plan.interactions;
                cand[i].intermediary = v2;
                cand[i].proposed_m = 0.5 * (lb + ub);
                consider(std::move(cand));
            }
        }
    }

    double no_trade = plan_objective_value({}, pop, obj);
    if (no_trade < best_val) {
        plan.interactions.clear();
        best_val = no_trade;
    }
    plan.objective_value = best_val;
    return plan;
}

// Exhaustive oracle for instances of at most 8 agents: enumerates every
// capacity-feasible interaction set; per matching, mean objectives use the
// per-edge endpoint rule and sigma objectives run the convex descent on the
// m box to stationarity.
enum class BruteForceMMode { by_objective, endpoint, convex_descent };

inline CentralPlan brute_force_plan(const TradeGraph& graph, const Population& pop, Objective obj,
                                    BruteForceMMode m_mode = BruteForceMMode::by_objective) {
    if (pop.size() > 8)
        throw std::invalid_argument("brute_force_plan: refusing instances larger than 8 agents");
    const bool endpoint_m = m_mode == BruteForceMMode::endpoint ||
                            (m_mode == BruteForceMMode::by_objective && is_mean_objective(obj));

    const int n = pop.size();
    // options[u]: feasible-interval edges out of u
    std::vector<std::vector<int>> options(n);
    for (const auto& [u, v] : graph.edges) {
        auto [lb, ub] = m_bounds(pop.agents[u], pop.agents[v], pop.gamma);
        if (lb <= ub) options[u].push_back(v);
    }

    detail::VarianceDescent descent(pop, is_group_scope(obj));

    CentralPlan best;
    best.objective = obj;
    best.objective_value = std::numeric_limits<double>::infinity();

    std::vector<int> load(n, 0);
    std::vector<Interaction> current;

    auto evaluate_leaf = [&]() {
        std::vector<Interaction> cand = current;
        double val;
        if (endpoint_m) {
            for (auto& j : cand)
                j.proposed_m =
                    edge_value(pop.agents[j.buyer], pop.agents[j.intermediary], pop,
                               is_mean_objective(obj) ? obj
                               : obj == Objective::sigma_individual ? Objective::mu_individual
                                                                    : Objective::mu_group)
                        .best_m;
            val = plan_objective_value(cand, pop, obj);
        } else {
            for (auto& j : cand)
                j.proposed_m = 0.5 * (m_bounds(pop.agents[j.buyer], pop.agents[j.intermediary],
                                               pop.gamma).first +
                                      m_bounds(pop.agents[j.buyer], pop.agents[j.intermediary],
                                               pop.gamma).second);
            val = descent.optimize(cand, 1e-12, 5000);
        }
        if (val < best.objective_value - 1e-15) {
            best.objective_value = val;
            best.interactions = cand;
        }
    };

    // per-buyer choice: no edge, or one of the feasible edges
    auto rec = [&](auto&& self, int u) -> void {
        if (u == n) {
            evaluate_leaf();
            return;
        }
        self(self, u + 1);
        for (int v : options[u]) {
            if (load[v] >= pop.agents[v].intermediary_capacity) continue;
            ++load[v];
            current.push_back({u, v, 0.0});
            self(self, u + 1);
            current.pop_back();
            --load[v];
        }
    };
    rec(rec, 0);
    return best;
}

} // namespace pricex
