#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricex/rng.hpp"

namespace pricex {

// Per-group price distribution: members of group `group_id` are offered
// prices drawn from Normal(mean, std_dev), clipped to the model's range.
struct GroupDistribution {
    int group_id = 0;
    double mean = 0.0;
    double std_dev = 0.0;
};

// A pricing algorithm: a family of per-group price distributions plus the
// price range it guarantees. `disutility_unit` is the currency scale used
// when constructing agent disutility distributions for this model (1 for
// unit-priced models, 50 for the flight model).
struct PricingModel {
    std::vector<GroupDistribution> groups;
    double price_floor = 0.0; // exclusive
    double price_cap = 1.0;   // inclusive
    std::string label;
    double disutility_unit = 1.0;

    const GroupDistribution& group(int group_id) const {
        for (const auto& g : groups)
            if (g.group_id == group_id) return g;
        throw std::out_of_range("PricingModel '" + label + "': unknown group id " +
                                std::to_string(group_id));
    }

    void validate() const {
        if (groups.empty())
            throw std::invalid_argument("PricingModel '" + label + "': no groups");
        for (const auto& g : groups) {
            if (g.mean <= price_floor || g.mean > price_cap)
                throw std::invalid_argument("PricingModel '" + label + "': group " +
                                            std::to_string(g.group_id) +
                                            " mean outside (floor, cap]");
            if (g.std_dev < 0.0)
                throw std::invalid_argument("PricingModel '" + label + "': group " +
                                            std::to_string(g.group_id) + " has negative std_dev");
        }
    }
};

namespace detail {

inline std::string format_delta_label(double delta) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A_%.2f", delta);
    return buf;
}

} // namespace detail

// Synthetic five-group dispersion family. All five models share an unweighted
// mean of group means equal to 0.50, so dispersion varies while the average
// offered price stays put.
inline PricingModel build_synthetic_model(double delta_level) {
    struct Row {
        double delta;
        double means[5];
        double sigma;
    };
    static const Row table[] = {
        {0.95, {0.1, 0.3, 0.5, 0.7, 0.9}, 3.0 / 90.0},
        {0.75, {0.2, 0.35, 0.5, 0.65, 0.8}, 3.0 / 90.0},
        {0.50, {0.3, 0.4, 0.5, 0.6, 0.7}, 2.0 / 90.0},
        {0.25, {0.4, 0.45, 0.5, 0.55, 0.6}, 1.0 / 90.0},
        {0.05, {0.5, 0.5, 0.5, 0.5, 0.5}, 1.0 / 90.0},
    };
    for (const auto& row : table) {
        if (std::abs(delta_level - row.delta) < 1e-9) {
            PricingModel model;
            model.price_floor = 0.0;
            model.price_cap = 1.0;
            model.label = detail::format_delta_label(row.delta);
            for (int g = 0; g < 5; ++g)
                model.groups.push_back({g + 1, row.means[g], row.sigma});
            model.validate();
            return model;
        }
    }
    throw std::invalid_argument(
        "unsupported dispersion level " + std::to_string(delta_level) +
        "; valid levels are {0.05, 0.25, 0.50, 0.75, 0.95}");
}

// Empirical airline-ticket model: nine fixed group prices, no variance.
inline PricingModel build_flight_model() {
    static const double prices[9] = {270.45, 271.91, 272.46, 273.01, 274.21,
                                     275.42, 275.82, 276.20, 276.60};
    PricingModel model;
    model.price_floor = 0.0;
    model.price_cap = 276.60;
    model.label = "flight";
    model.disutility_unit = 50.0;
    for (int g = 0; g < 9; ++g)
        model.groups.push_back({g + 1, prices[g], 0.0});
    model.validate();
    return model;
}

// Preset lookup for config files: "A_0.05" ... "A_0.95" or "flight".
inline PricingModel model_by_name(const std::string& name) {
    if (name == "flight") return build_flight_model();
    if (name.rfind("A_", 0) == 0) {
        for (double delta : {0.05, 0.25, 0.50, 0.75, 0.95})
            if (name == detail::format_delta_label(delta)) return build_synthetic_model(delta);
    }
    throw std::invalid_argument("unknown pricing preset '" + name +
                                "'; expected A_0.05, A_0.25, A_0.50, A_0.75, A_0.95 or flight");
}

// One price draw for a member of `group_id`. Zero-variance groups return the
// group mean exactly and consume no randomness.
inline double sample_price(const PricingModel& model, int group_id, Rng& rng) {
    const GroupDistribution& g = model.group(group_id);
    if (g.std_dev == 0.0) return g.mean;
    return rng.truncated_normal(g.mean, g.std_dev, model.price_floor, model.price_cap);
}

// Normalized spread of the model: the 2-sigma-extended range of group means,
// over the price cap.
inline double dispersion_of(const PricingModel& model) {
    double hi = -1e300, lo = 1e300;
    for (const auto& g : model.groups) {
        hi = std::max(hi, g.mean + 2.0 * g.std_dev);
        lo = std::min(lo, g.mean - 2.0 * g.std_dev);
    }
    return (hi - lo) / model.price_cap;
}

} // namespace pricex
