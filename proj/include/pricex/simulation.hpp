#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pricex/exchange.hpp"
#include "pricex/fairness.hpp"
#include "pricex/market.hpp"
#include "pricex/matching.hpp"
#include "pricex/pricing.hpp"
#include "pricex/rng.hpp"

namespace pricex {

struct TrialConfig {
    int population_size = 100;
    PricingModel model = build_synthetic_model(0.95);
    double gamma = 0.4;
    int capacity = 16;
    Objective objective = Objective::mu_individual;
    PriceMode mode = PriceMode::decentralized;
    double disutility_scale = 1.0;
    std::uint64_t seed = 0;
    long quadratic_budget = 10000;

    void validate() const {
        if (population_size < 2)
            throw std::invalid_argument("trial config: population size must be >= 2");
        if (gamma < 0.0 || gamma >= 1.0)
            throw std::invalid_argument("trial config: gamma must lie in [0, 1)");
        if (capacity < 0) throw std::invalid_argument("trial config: capacity must be >= 0");
        if (disutility_scale < 0.0)
            throw std::invalid_argument("trial config: disutility scale must be >= 0");
    }
};

struct TrialResult {
    FairnessReport pre;
    FairnessReport post;
    double revenue = 0.0;
    LedgerOutcome outcome;
    CentralPlan plan;
    Population population;
};

inline std::vector<double> offered_prices(const Population& pop) {
    std::vector<double> p(pop.agents.size());
    for (const auto& a : pop.agents) p[a.id] = a.offered_price;
    return p;
}

namespace detail {

// Distinct sub-streams of one trial seed. Population generation and
// execution draws use separate streams so both settlement modes of the same
// trial see identical populations, plans and disutility draws.
constexpr std::uint64_t kPopulationStream = 0x706f70;
constexpr std::uint64_t kExecutionStream = 0x657865;

inline CentralPlan solve_for(const TrialConfig& cfg, const TradeGraph& graph,
                             const Population& pop) {
    if (is_mean_objective(cfg.objective))
        return solve_linear_centralized(graph, pop, cfg.objective);
    return solve_quadratic_centralized(graph, pop, cfg.objective, cfg.quadratic_budget);
}

} // namespace detail

// One full pipeline pass: population, trade graph, centralized optimization
// of the configured objective, settlement in the configured mode.
// Deterministic given the seed.
inline TrialResult run_trial(const TrialConfig& cfg) {
    cfg.validate();
    Rng gen_rng(seed_for(cfg.seed, detail::kPopulationStream, 0));
    Rng exec_rng(seed_for(cfg.seed, detail::kExecutionStream, 0));

    TrialResult r;
    r.population = generate_population(cfg.population_size, cfg.model, cfg.gamma, cfg.capacity,
                                       cfg.disutility_scale, gen_rng);
    TradeGraph graph = build_trade_graph(r.population);
    r.plan = detail::solve_for(cfg, graph, r.population);
    auto draws = draw_interaction_disutilities(r.plan, r.population, exec_rng);
    r.outcome = execute_plan_with_draws(r.plan, r.population, cfg.mode, draws);
    r.pre = fairness_metrics(offered_prices(r.population), r.population.groups);
    r.post = fairness_metrics(r.outcome.net_costs, r.population.groups);
    r.revenue = r.outcome.system_revenue;
    return r;
}

// Both settlement modes of one trial, sharing the population, the matching
// and the disutility draws, so the comparison is paired.
inline std::pair<TrialResult, TrialResult> run_trial_paired(const TrialConfig& cfg) {
    cfg.validate();
    Rng gen_rng(seed_for(cfg.seed, detail::kPopulationStream, 0));
    Rng exec_rng(seed_for(cfg.seed, detail::kExecutionStream, 0));

    TrialResult base;
    base.population = generate_population(cfg.population_size, cfg.model, cfg.gamma, cfg.capacity,
                                          cfg.disutility_scale, gen_rng);
    TradeGraph graph = build_trade_graph(base.population);
    base.plan = detail::solve_for(cfg, graph, base.population);
    auto draws = draw_interaction_disutilities(base.plan, base.population, exec_rng);
    base.pre = fairness_metrics(offered_prices(base.population), base.population.groups);

    TrialResult cen = base, dec = base;
    cen.outcome = execute_plan_with_draws(base.plan, base.population, PriceMode::centralized, draws);
    cen.post = fairness_metrics(cen.outcome.net_costs, base.population.groups);
    cen.revenue = cen.outcome.system_revenue;
    dec.outcome = execute_plan_with_draws(base.plan, base.population, PriceMode::decentralized, draws);
    dec.post = fairness_metrics(dec.outcome.net_costs, base.population.groups);
    dec.revenue = dec.outcome.system_revenue;
    return {cen, dec};
}

struct PropertyViolation {
    std::string property; // "theorem1" | "individual_rationality" | "conservation"
    std::string detail;
};

// Per-outcome checks of the theoretical guarantees:
//  (a) mean net cost is bounded below by p_min(1 + gamma/(|V|(1-gamma)))
//      whenever at least one trade executed (the bound's derivation uses
//      |J| >= 1; with no trades the floor is p_min itself),
//  (b) individual rationality: both realized utilities strictly positive on
//      every executed trade,
//  (c) money conservation: total net cost equals market receipts plus the
//      system's revenue.
inline std::vector<PropertyViolation> verify_properties(const LedgerOutcome& outcome,
                                                        const Population& pop) {
    std::vector<PropertyViolation> violations;
    const double gamma = pop.gamma;
    const int n = pop.size();

    double mean_cost = 0.0;
    for (double w : outcome.net_costs) mean_cost += w;
    mean_cost /= n;
    const double p_min = pop.min_price();
    const double trade_term =
        outcome.trades.empty() ? 0.0 : gamma / (static_cast<double>(n) * (1.0 - gamma));
    const double bound = p_min * (1.0 + trade_term);
    if (mean_cost < bound - 1e-9)
        violations.push_back({"theorem1", "mean net cost " + std::to_string(mean_cost) +
                                              " below bound " + std::to_string(bound)});

    for (const auto& t : outcome.trades) {
        const double fu =
            pop.agents[t.buyer].offered_price - t.m - t.buyer_disutility;
        const double fv = t.m * (1.0 - gamma) - pop.agents[t.intermediary].offered_price -
                          t.intermediary_disutility;
        if (fu <= 0.0 || fv <= 0.0)
            violations.push_back({"individual_rationality",
                                  "trade " + std::to_string(t.buyer) + "->" +
                                      std::to_string(t.intermediary) + " has utilities (" +
                                      std::to_string(fu) + ", " + std::to_string(fv) + ")"});
    }

    double total_cost = 0.0;
    for (double w : outcome.net_costs) total_cost += w;
    std::vector<char> bought_via_trade(n, 0);
    double market_receipts = 0.0;
    for (const auto& t : outcome.trades) {
        bought_via_trade[t.buyer] = 1;
        market_receipts += pop.agents[t.intermediary].offered_price;
    }
    for (const auto& a : pop.agents)
        if (!bought_via_trade[a.id]) market_receipts += a.offered_price;
    const double expected = market_receipts + outcome.system_revenue;
    const double tol = 1e-9 * std::max(1.0, std::abs(expected));
    if (std::abs(total_cost - expected) > tol)
        violations.push_back({"conservation", "net costs sum to " + std::to_string(total_cost) +
                                                  ", market receipts plus revenue are " +
                                                  std::to_string(expected)});

    double revenue_check = 0.0;
    for (const auto& t : outcome.trades) revenue_check += gamma * t.m;
    if (std::abs(revenue_check - outcome.system_revenue) > 1e-9 * std::max(1.0, revenue_check))
        violations.push_back({"conservation", "recorded revenue does not equal gamma * sum(m)"});

    return violations;
}

// The zero-disutility, gamma = 0, k = N-1 construction with distinct prices:
// the sigma_I-optimal plan routes everyone to the cheapest agent at its
// price, so the optimal standard deviation is exactly zero. Returns the
// optimizer's sigma_I.
inline double claim1_check(int n) {
    if (n < 2 || n > 12)
        throw std::invalid_argument("claim1_check: n must lie in [2, 12]");
    PricingModel model;
    model.price_cap = 1.0;
    model.label = "claim1";
    for (int g = 0; g < n; ++g)
        model.groups.push_back({g + 1, 0.1 + 0.8 * g / (n - 1), 0.0});
    model.validate();

    Rng rng(seed_for(0x636c31, 0, 0));
    Population pop = generate_population(n, model, 0.0, n - 1, 0.0, rng);
    TradeGraph graph = build_trade_graph(pop);
    CentralPlan plan = solve_quadratic_centralized(graph, pop, Objective::sigma_individual, 10000);
    return plan.objective_value;
}

enum class SweepAxis { capacity, gamma, delta, population };

inline const char* label_of(SweepAxis a) {
    switch (a) {
        case SweepAxis::capacity: return "k";
        case SweepAxis::gamma: return "gamma";
        case SweepAxis::delta: return "delta";
        case SweepAxis::population: return "N";
    }
    return "?";
}

inline SweepAxis axis_from_label(const std::string& label) {
    if (label == "k") return SweepAxis::capacity;
    if (label == "gamma") return SweepAxis::gamma;
    if (label == "delta") return SweepAxis::delta;
    if (label == "N") return SweepAxis::population;
    throw std::invalid_argument("unknown sweep axis '" + label + "'; expected k, gamma, delta or N");
}

struct SweepRecord {
    double axis_value = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    FairnessReport pre;
    FairnessReport post;
    double revenue = 0.0;
    int executed_trades = 0;
    int violations = 0;
};

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0;
};

struct SweepPoint {
    double axis_value = 0.0;
    std::vector<SweepRecord> records;
    Aggregate pre_mu_I, pre_sigma_I, pre_mu_G, pre_sigma_G;
    Aggregate post_mu_I, post_sigma_I, post_mu_G, post_sigma_G;
    Aggregate revenue, executed_trades;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::capacity;
    std::vector<double> values;
    int replications = 0;
    std::vector<SweepPoint> points;
    long total_violations = 0;
    std::string first_violation;
};

namespace detail {

inline TrialConfig config_at(const TrialConfig& base, SweepAxis axis, double value) {
    TrialConfig cfg = base;
    switch (axis) {
        case SweepAxis::capacity:
            cfg.capacity = static_cast<int>(std::lround(value));
            break;
        case SweepAxis::gamma:
            cfg.gamma = value;
            break;
        case SweepAxis::delta:
            cfg.model = build_synthetic_model(value);
            break;
        case SweepAxis::population:
            cfg.population_size = static_cast<int>(std::lround(value));
            break;
    }
    return cfg;
}

inline Aggregate aggregate_of(const std::vector<SweepRecord>& records,
                              const std::function<double(const SweepRecord&)>& f) {
    Aggregate a;
    if (records.empty()) return a;
    for (const auto& r : records) a.mean += f(r);
    a.mean /= static_cast<double>(records.size());
    for (const auto& r : records) a.sd += (f(r) - a.mean) * (f(r) - a.mean);
    a.sd = std::sqrt(a.sd / static_cast<double>(records.size()));
    return a;
}

// Index-sharded parallel loop: results land in caller-owned slots, so the
// outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            body(i);
        }
    };
    std::vector<std::thread> threads;
    const int n_threads = std::min<int>(jobs, static_cast<int>(count));
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

} // namespace detail

// Monte Carlo sweep over one axis. Each point gets `replications`
// independently seeded trials; seeds derive from (base seed, point index,
// replication index), so appending points leaves existing ones untouched.
// Theorem 1 / IR / conservation are verified on every trial and tallied.
inline SweepResult run_sweep(const TrialConfig& base, SweepAxis axis,
                             const std::vector<double>& values, int replications, int jobs = 1) {
    if (values.empty()) throw std::invalid_argument("run_sweep: values list is empty");
    if (replications < 1) throw std::invalid_argument("run_sweep: replications must be >= 1");
    for (std::size_t i = 0; i < values.size(); ++i) {
        try {
            detail::config_at(base, axis, values[i]).validate();
        } catch (const std::exception& e) {
            throw std::invalid_argument("run_sweep: invalid axis point " + std::to_string(values[i]) +
                                        " (index " + std::to_string(i) + "): " + e.what());
        }
    }

    SweepResult result;
    result.axis = axis;
    result.values = values;
    result.replications = replications;
    result.points.resize(values.size());

    const std::size_t total = values.size() * static_cast<std::size_t>(replications);
    std::vector<SweepRecord> flat(total);
    std::vector<std::string> violation_notes(total);

    detail::parallel_for(total, jobs, [&](std::size_t idx) {
        const std::size_t pi = idx / static_cast<std::size_t>(replications);
        const int rep = static_cast<int>(idx % static_cast<std::size_t>(replications));
        TrialConfig cfg = detail::config_at(base, axis, values[pi]);
        cfg.seed = seed_for(base.seed, pi, static_cast<std::uint64_t>(rep));
        TrialResult tr = run_trial(cfg);
        auto violations = verify_properties(tr.outcome, tr.population);

        SweepRecord rec;
        rec.axis_value = values[pi];
        rec.replication = rep;
        rec.seed = cfg.seed;
        rec.pre = tr.pre;
        rec.post = tr.post;
        rec.revenue = tr.revenue;
        rec.executed_trades = static_cast<int>(tr.outcome.trades.size());
        rec.violations = static_cast<int>(violations.size());
        if (!violations.empty())
            violation_notes[idx] = violations.front().property + ": " + violations.front().detail;
        flat[idx] = rec;
    });

    for (std::size_t pi = 0; pi < values.size(); ++pi) {
        SweepPoint& pt = result.points[pi];
        pt.axis_value = values[pi];
        pt.records.assign(flat.begin() + pi * replications, flat.begin() + (pi + 1) * replications);
        for (const auto& rec : pt.records) result.total_violations += rec.violations;
        pt.pre_mu_I = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.pre.mu_individual; });
        pt.pre_sigma_I = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.pre.sigma_individual; });
        pt.pre_mu_G = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.pre.mu_group; });
        pt.pre_sigma_G = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.pre.sigma_group; });
        pt.post_mu_I = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.post.mu_individual; });
        pt.post_sigma_I = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.post.sigma_individual; });
        pt.post_mu_G = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.post.mu_group; });
        pt.post_sigma_G = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.post.sigma_group; });
        pt.revenue = detail::aggregate_of(pt.records, [](const SweepRecord& r) { return r.revenue; });
        pt.executed_trades =
            detail::aggregate_of(pt.records, [](const SweepRecord& r) { return static_cast<double>(r.executed_trades); });
    }
    if (result.total_violations > 0)
        for (const auto& note : violation_notes)
            if (!note.empty()) {
                result.first_violation = note;
                break;
            }
    return result;
}

} // namespace pricex
