#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pricex {

// The four fairness metrics over per-agent net costs: mean and population
// standard deviation, at individual scope and at group scope (group means as
// the unit of analysis).
struct FairnessReport {
    double mu_individual = 0.0;
    double sigma_individual = 0.0;
    double mu_group = 0.0;
    double sigma_group = 0.0;
};

inline FairnessReport fairness_metrics(const std::vector<double>& net_costs,
                                       const std::vector<std::vector<int>>& groups) {
    const std::size_t n = net_costs.size();
    if (n == 0) throw std::invalid_argument("fairness_metrics: empty population");
    if (groups.empty()) throw std::invalid_argument("fairness_metrics: empty group partition");

    FairnessReport r;
    double sum = 0.0;
    for (double w : net_costs) sum += w;
    r.mu_individual = sum / static_cast<double>(n);

    double ss = 0.0;
    for (double w : net_costs) ss += (w - r.mu_individual) * (w - r.mu_individual);
    r.sigma_individual = std::sqrt(ss / static_cast<double>(n));

    std::vector<double> group_means;
    group_means.reserve(groups.size());
    std::size_t covered = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("fairness_metrics: empty group in partition");
        double gs = 0.0;
        for (int id : g) {
            if (id < 0 || static_cast<std::size_t>(id) >= n)
                throw std::invalid_argument("fairness_metrics: group member out of range");
            gs += net_costs[static_cast<std::size_t>(id)];
        }
        covered += g.size();
        group_means.push_back(gs / static_cast<double>(g.size()));
    }
    if (covered != n)
        throw std::invalid_argument("fairness_metrics: groups do not partition the population");

    double gsum = 0.0;
    for (double m : group_means) gsum += m;
    r.mu_group = gsum / static_cast<double>(group_means.size());
    double gss = 0.0;
    for (double m : group_means) gss += (m - r.mu_group) * (m - r.mu_group);
    r.sigma_group = std::sqrt(gss / static_cast<double>(group_means.size()));
    return r;
}

// One line of the pre/post comparison. percent_change is empty when the
// pre-trade value is zero; the raw delta is always present.
struct FeasibilityRow {
    std::string metric;
    double pre_trade = 0.0;
    double post_trade = 0.0;
    std::optional<double> percent_change;
    double delta = 0.0;
};

inline std::vector<FeasibilityRow> feasibility_report(const FairnessReport& pre,
                                                      const FairnessReport& post) {
    auto row = [](const char* name, double a, double b) {
        FeasibilityRow r;
        r.metric = name;
        r.pre_trade = a;
        r.post_trade = b;
        r.delta = b - a;
        if (a != 0.0) r.percent_change = 100.0 * (b - a) / a;
        return r;
    };
    return {row("mu_I", pre.mu_individual, post.mu_individual),
            row("sigma_I", pre.sigma_individual, post.sigma_individual),
            row("mu_G", pre.mu_group, post.mu_group),
            row("sigma_G", pre.sigma_group, post.sigma_group)};
}

} // namespace pricex
