#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pricex/matching.hpp"
#include "pricex/rng.hpp"

using namespace pricex;

namespace {

Population make_population(const std::vector<double>& prices, double gamma, int capacity,
                           int num_groups = 0) {
    Population pop;
    pop.gamma = gamma;
    if (num_groups <= 0) num_groups = static_cast<int>(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
        Agent a;
        a.id = static_cast<int>(i);
        a.group_id = static_cast<int>(i) % num_groups + 1;
        a.offered_price = prices[i];
        a.intermediary_capacity = capacity;
        pop.agents.push_back(a);
    }
    pop.rebuild_groups();
    return pop;
}

Population random_population(Rng& rng, int n, double gamma, int capacity, int num_groups) {
    std::vector<double> prices(n);
    for (double& p : prices) p = rng.uniform(0.05, 1.0);
    return make_population(prices, gamma, capacity, num_groups);
}

void check_plan_feasible(const CentralPlan& plan, const Population& pop) {
    std::vector<int> buy(pop.size(), 0), broker(pop.size(), 0);
    for (const auto& j : plan.interactions) {
        ++buy[j.buyer];
        ++broker[j.intermediary];
        auto [lb, ub] = m_bounds(pop.agents[j.buyer], pop.agents[j.intermediary], pop.gamma);
        REQUIRE(j.proposed_m >= lb - 1e-12);
        REQUIRE(j.proposed_m <= ub + 1e-12);
    }
    for (const auto& a : pop.agents) {
        REQUIRE(buy[a.id] <= 1);
        REQUIRE(broker[a.id] <= a.intermediary_capacity);
    }
}

} // namespace

TEST_CASE("trade graph edges follow strict price order") {
    Population pop = make_population({0.9, 0.5, 0.1}, 0.0, 1);
    TradeGraph g = build_trade_graph(pop);
    REQUIRE(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

    REQUIRE(build_trade_graph(make_population({0.5, 0.5}, 0.0, 1)).edges.empty());

    TradeGraph g2 = build_trade_graph(make_population({0.2, 0.8}, 0.0, 1));
    REQUIRE(g2.edges == std::vector<std::pair<int, int>>{{1, 0}});
}

TEST_CASE("edge value for the mean objective") {
    Rng rng(1);
    Population pop = random_population(rng, 100, 0.4, 1, 5); // weights 1/100
    pop.agents[0].offered_price = 0.9;
    pop.agents[1].offered_price = 0.1;
    EdgeValue ev = edge_value(pop.agents[0], pop.agents[1], pop, Objective::mu_individual);
    REQUIRE(ev.best_m == Catch::Approx(0.1 / 0.6).epsilon(1e-12));
    REQUIRE(ev.weight == Catch::Approx((0.9 - 0.1 - 0.4 * (0.1 / 0.6)) / 100.0).epsilon(1e-9));

    // empty feasible interval is signalled as non-positive weight
    Population two = make_population({0.3, 0.2}, 0.5, 1);
    EdgeValue bad = edge_value(two.agents[0], two.agents[1], two, Objective::mu_individual);
    REQUIRE(bad.weight <= 0.0);

    // gamma = 0: lower bound wins on the tie, weight is the price gap over N
    Population flat = make_population({0.8, 0.3}, 0.0, 1);
    EdgeValue tie = edge_value(flat.agents[0], flat.agents[1], flat, Objective::mu_individual);
    REQUIRE(tie.best_m == Catch::Approx(0.3));
    REQUIRE(tie.weight == Catch::Approx((0.8 - 0.3) / 2.0));
}

TEST_CASE("two-agent linear solve matches the hand enumeration") {
    Population pop = make_population({0.9, 0.1}, 0.4, 1);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan plan = solve_linear_centralized(g, pop, Objective::mu_individual);
    REQUIRE(plan.interactions.size() == 1);
    REQUIRE(plan.interactions[0].buyer == 0);
    REQUIRE(plan.interactions[0].intermediary == 1);
    REQUIRE(plan.interactions[0].proposed_m == Catch::Approx(0.1 / 0.6).epsilon(1e-12));
    REQUIRE(plan.objective_value == Catch::Approx(0.4 / 3.0).epsilon(1e-9));

    CentralPlan brute = brute_force_plan(g, pop, Objective::mu_individual);
    REQUIRE(plan.objective_value == Catch::Approx(brute.objective_value).margin(1e-9));
}

TEST_CASE("capacity zero leaves everyone at the offered price") {
    Population pop = make_population({0.9, 0.5, 0.2}, 0.4, 0);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan plan = solve_linear_centralized(g, pop, Objective::mu_individual);
    REQUIRE(plan.interactions.empty());
    REQUIRE(plan.objective_value == Catch::Approx((0.9 + 0.5 + 0.2) / 3.0));

    CentralPlan brute = brute_force_plan(g, pop, Objective::mu_individual);
    REQUIRE(brute.interactions.empty());
}

TEST_CASE("linear solver is exact against the exhaustive oracle") {
    Rng rng(1234);
    for (int iter = 0; iter < 40; ++iter) {
        int n = 3 + static_cast<int>(rng.uniform() * 6); // 3..8
        double gamma = rng.uniform() < 0.5 ? 0.0 : 0.4;
        int k = 1 + static_cast<int>(rng.uniform() * 3);
        int groups = 1 + static_cast<int>(rng.uniform() * 3);
        Population pop = random_population(rng, n, gamma, k, groups);
        TradeGraph g = build_trade_graph(pop);
        for (Objective obj : {Objective::mu_individual, Objective::mu_group}) {
            CentralPlan fast = solve_linear_centralized(g, pop, obj);
            CentralPlan brute = brute_force_plan(g, pop, obj);
            INFO("iter=" << iter << " n=" << n << " gamma=" << gamma << " k=" << k
                         << " obj=" << label_of(obj));
            REQUIRE(fast.objective_value == Catch::Approx(brute.objective_value).margin(1e-9));
            check_plan_feasible(fast, pop);
        }
    }
}

TEST_CASE("six-agent group objective equals the oracle") {
    Rng rng(5);
    Population pop = random_population(rng, 6, 0.4, 2, 3);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan fast = solve_linear_centralized(g, pop, Objective::mu_group);
    CentralPlan brute = brute_force_plan(g, pop, Objective::mu_group);
    REQUIRE(fast.objective_value == Catch::Approx(brute.objective_value).margin(1e-9));
}

TEST_CASE("raising k never hurts the mean objective") {
    Rng rng(77);
    for (int iter = 0; iter < 20; ++iter) {
        Population pop = random_population(rng, 12, 0.3, 0, 4);
        TradeGraph g = build_trade_graph(pop);
        double prev = std::numeric_limits<double>::infinity();
        for (int k : {0, 1, 2, 4, 8}) {
            for (auto& a : pop.agents) a.intermediary_capacity = k;
            CentralPlan plan = solve_linear_centralized(g, pop, Objective::mu_individual);
            REQUIRE(plan.objective_value <= prev + 1e-12);
            REQUIRE(plan.interactions.size() <=
                    static_cast<std::size_t>(std::min<long>(pop.size(), static_cast<long>(k) * pop.size())));
            prev = plan.objective_value;
        }
    }
}

TEST_CASE("claim-1 instance: full-capacity sigma optimum is zero") {
    Population pop = make_population({0.1, 0.3, 0.5, 0.7, 0.9}, 0.0, 4);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan plan = solve_quadratic_centralized(g, pop, Objective::sigma_individual, 2000);
    REQUIRE(plan.objective_value <= 1e-9);
    check_plan_feasible(plan, pop);
}

TEST_CASE("positive system cut blocks full equalization") {
    Population pop = make_population({0.1, 0.3, 0.5, 0.7, 0.9}, 0.4, 4);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan brute = brute_force_plan(g, pop, Objective::sigma_individual);
    REQUIRE(brute.objective_value > 1e-6);
    CentralPlan heur = solve_quadratic_centralized(g, pop, Objective::sigma_individual, 5000);
    REQUIRE(heur.objective_value >= brute.objective_value - 1e-9);
    REQUIRE(heur.objective_value <= brute.objective_value + 1e-4);
}

TEST_CASE("quadratic heuristic close to the oracle on small instances") {
    Rng rng(2024);
    int hits = 0;
    const int total = 30;
    for (int iter = 0; iter < total; ++iter) {
        int n = 3 + static_cast<int>(rng.uniform() * 4); // 3..6
        double gamma = rng.uniform(0.0, 0.6);
        int k = 1 + static_cast<int>(rng.uniform() * 3);
        int groups = 1 + static_cast<int>(rng.uniform() * 3);
        Population pop = random_population(rng, n, gamma, k, groups);
        TradeGraph g = build_trade_graph(pop);
        Objective obj = rng.uniform() < 0.5 ? Objective::sigma_individual : Objective::sigma_group;
        CentralPlan heur = solve_quadratic_centralized(g, pop, obj, 10000);
        CentralPlan brute = brute_force_plan(g, pop, obj);
        check_plan_feasible(heur, pop);
        REQUIRE(heur.objective_value <= plan_objective_value({}, pop, obj) + 1e-12);
        if (heur.objective_value <= brute.objective_value + 1e-6) ++hits;
    }
    REQUIRE(hits >= total * 9 / 10);
}

TEST_CASE("zero budget returns the seeded plan") {
    Population pop = make_population({0.9, 0.6, 0.2}, 0.1, 2);
    TradeGraph g = build_trade_graph(pop);
    CentralPlan plan = solve_quadratic_centralized(g, pop, Objective::sigma_individual, 0);
    for (const auto& j : plan.interactions) {
        auto [lb, ub] = m_bounds(pop.agents[j.buyer], pop.agents[j.intermediary], pop.gamma);
        REQUIRE(j.proposed_m == Catch::Approx(lb));
    }
}

TEST_CASE("empty graph sigma objective is the price spread") {
    Population pop = make_population({0.5, 0.5, 0.5}, 0.2, 3);
    TradeGraph g = build_trade_graph(pop);
    REQUIRE(g.edges.empty());
    CentralPlan plan = solve_quadratic_centralized(g, pop, Objective::sigma_individual, 100);
    REQUIRE(plan.interactions.empty());
    REQUIRE(plan.objective_value == Catch::Approx(0.0).margin(1e-15));

    // edges exist but no feasible price window: still the no-trade spread
    Population tight = make_population({0.5, 0.45}, 0.5, 1);
    TradeGraph tg = build_trade_graph(tight);
    REQUIRE_FALSE(tg.edges.empty());
    CentralPlan tp = solve_quadratic_centralized(tg, tight, Objective::sigma_individual, 100);
    REQUIRE(tp.interactions.empty());
    REQUIRE(tp.objective_value == Catch::Approx(0.025));
}

TEST_CASE("oracle guard and degenerate instances") {
    Rng rng(9);
    Population big = random_population(rng, 9, 0.2, 2, 3);
    TradeGraph g = build_trade_graph(big);
    REQUIRE_THROWS_AS(brute_force_plan(g, big, Objective::mu_individual), std::invalid_argument);

    Population lone = make_population({0.7}, 0.0, 1);
    TradeGraph lg = build_trade_graph(lone);
    CentralPlan mean_plan = brute_force_plan(lg, lone, Objective::mu_individual);
    REQUIRE(mean_plan.interactions.empty());
    REQUIRE(mean_plan.objective_value == Catch::Approx(0.7));
    CentralPlan sd_plan = brute_force_plan(lg, lone, Objective::sigma_individual);
    REQUIRE(sd_plan.objective_value == Catch::Approx(0.0).margin(1e-15));
}
