#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricex/exchange.hpp"
#include "pricex/market.hpp"
#include "pricex/matching.hpp"
#include "pricex/pricing.hpp"
#include "pricex/simulation.hpp"

namespace pricex {

// Shortest round-trippable decimal rendering; keeps CSV output byte-stable
// across runs with the same seed.
inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double parsed = std::strtod(buf, nullptr);
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
        if (std::strtod(shorter, nullptr) == parsed) return shorter;
    }
    return buf;
}

// FNV-1a over the raw config text; recorded in every CSV so outputs can be
// traced back to the exact experiment definition.
inline std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string metadata_line(std::uint64_t config_hash, std::uint64_t seed) {
    return "# config_hash=" + hash_hex(config_hash) + " seed=" + std::to_string(seed) + "\n";
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---- population ------------------------------------------------------

inline std::string population_to_text(const Population& pop) {
    std::ostringstream out;
    out << "# gamma " << fmt_num(pop.gamma) << "\n";
    if (!pop.agents.empty())
        out << "# capacity " << pop.agents.front().intermediary_capacity << "\n";
    out << "id group price eps_mean eps_sd\n";
    for (const auto& a : pop.agents)
        out << a.id << " " << a.group_id << " " << fmt_num(a.offered_price) << " "
            << fmt_num(a.disutility_mean) << " " << fmt_num(a.disutility_sd) << "\n";
    return out.str();
}

inline Population population_from_text(const std::string& text) {
    Population pop;
    int capacity = 0;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "gamma") ls >> pop.gamma;
            if (key == "capacity") ls >> capacity;
            continue;
        }
        if (line.rfind("id ", 0) == 0) continue; // header
        Agent a;
        std::istringstream ls(line);
        if (!(ls >> a.id >> a.group_id >> a.offered_price >> a.disutility_mean >> a.disutility_sd))
            throw std::runtime_error("population line " + std::to_string(lineno) + ": parse error");
        a.intermediary_capacity = capacity;
        pop.agents.push_back(a);
    }
    pop.rebuild_groups();
    return pop;
}

// ---- pricing model files ----------------------------------------------
// Plain-text tabular format: one "cap <money>" line, optional
// "disutility_unit <money>" line, then rows of "group_id mean std_dev".

inline PricingModel load_pricing_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pricing model file '" + path + "'");
    PricingModel model;
    model.label = path;
    bool cap_seen = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto anchored = [&](const std::string& msg) {
            return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
        };
        std::string trimmed = line;
        if (auto pos = trimmed.find('#'); pos != std::string::npos) trimmed.resize(pos);
        std::istringstream ls(trimmed);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "cap") {
            if (!(ls >> model.price_cap)) throw anchored("expected cap value");
            cap_seen = true;
        } else if (first == "disutility_unit") {
            if (!(ls >> model.disutility_unit)) throw anchored("expected disutility_unit value");
        } else {
            GroupDistribution g;
            try {
                g.group_id = std::stoi(first);
            } catch (...) {
                throw anchored("expected group id, 'cap' or 'disutility_unit'");
            }
            if (!(ls >> g.mean >> g.std_dev)) throw anchored("expected 'group_id mean std_dev'");
            model.groups.push_back(g);
        }
    }
    if (!cap_seen) throw std::runtime_error(path + ": missing 'cap' line");
    model.validate();
    return model;
}

// ---- plans and ledgers -------------------------------------------------

inline std::string plan_to_text(const CentralPlan& plan) {
    std::ostringstream out;
    out << "buyer intermediary m\n";
    for (const auto& j : plan.interactions)
        out << j.buyer << " " << j.intermediary << " " << fmt_num(j.proposed_m) << "\n";
    return out.str();
}

// One CSV row per agent plus a trailing summary comment.
inline std::string ledger_to_csv(const LedgerOutcome& outcome, const Population& pop,
                                 std::uint64_t config_hash, std::uint64_t seed) {
    std::vector<char> bought(pop.agents.size(), 0), brokered(pop.agents.size(), 0);
    std::vector<double> m_paid(pop.agents.size(), 0.0);
    for (const auto& t : outcome.trades) {
        bought[t.buyer] = 1;
        m_paid[t.buyer] = t.m;
        brokered[t.intermediary] = 1;
    }
    std::ostringstream out;
    out << metadata_line(config_hash, seed);
    out << "id,group,price,role,m,omega\n";
    for (const auto& a : pop.agents) {
        const char* role = bought[a.id] && brokered[a.id] ? "both"
                           : bought[a.id]                 ? "buyer"
                           : brokered[a.id]               ? "intermediary"
                                                          : "none";
        out << a.id << "," << a.group_id << "," << fmt_num(a.offered_price) << "," << role << ",";
        if (bought[a.id]) out << fmt_num(m_paid[a.id]);
        out << "," << fmt_num(outcome.net_costs[a.id]) << "\n";
    }
    out << "# summary revenue=" << fmt_num(outcome.system_revenue)
        << " executed_trades=" << outcome.trades.size() << " mode=" << label_of(outcome.mode)
        << "\n";
    return out.str();
}

// ---- sweep outputs ------------------------------------------------------
// Every row carries the full experiment key (objective, mode, pricing, N, k,
// gamma) with the swept coordinate substituted per point, so rows stay
// unambiguous when files from different series are concatenated.

namespace detail {

inline std::string point_key(const TrialConfig& base, const SweepResult& sweep, double value) {
    TrialConfig eff = config_at(base, sweep.axis, value);
    std::ostringstream out;
    out << label_of(eff.objective) << "," << label_of(eff.mode) << "," << eff.model.label << ","
        << eff.population_size << "," << eff.capacity << "," << fmt_num(eff.gamma);
    return out.str();
}

} // namespace detail

// Long format: one row per (axis value, replication).
inline std::string sweep_long_csv(const SweepResult& sweep, const TrialConfig& base,
                                  std::uint64_t config_hash, std::uint64_t seed) {
    std::ostringstream out;
    out << metadata_line(config_hash, seed);
    out << "objective,mode,pricing,N,k,gamma," << label_of(sweep.axis)
        << ",replication,trial_seed,pre_mu_I,pre_sigma_I,pre_mu_G,pre_sigma_G,"
           "post_mu_I,post_sigma_I,post_mu_G,post_sigma_G,revenue,executed_trades,violations\n";
    for (const auto& pt : sweep.points) {
        const std::string key = detail::point_key(base, sweep, pt.axis_value);
        for (const auto& r : pt.records)
            out << key << "," << fmt_num(r.axis_value) << "," << r.replication << "," << r.seed
                << "," << fmt_num(r.pre.mu_individual) << "," << fmt_num(r.pre.sigma_individual)
                << "," << fmt_num(r.pre.mu_group) << "," << fmt_num(r.pre.sigma_group) << ","
                << fmt_num(r.post.mu_individual) << "," << fmt_num(r.post.sigma_individual) << ","
                << fmt_num(r.post.mu_group) << "," << fmt_num(r.post.sigma_group) << ","
                << fmt_num(r.revenue) << "," << r.executed_trades << "," << r.violations << "\n";
    }
    return out.str();
}

// One aggregate row per axis value.
inline std::string sweep_aggregate_csv(const SweepResult& sweep, const TrialConfig& base,
                                       std::uint64_t config_hash, std::uint64_t seed) {
    std::ostringstream out;
    out << metadata_line(config_hash, seed);
    out << "objective,mode,pricing,N,k,gamma," << label_of(sweep.axis)
        << ",replications,post_mu_I_mean,post_mu_I_sd,post_sigma_I_mean,post_sigma_I_sd,"
           "post_mu_G_mean,post_mu_G_sd,post_sigma_G_mean,post_sigma_G_sd,"
           "revenue_mean,revenue_sd,executed_trades_mean,executed_trades_sd\n";
    for (const auto& pt : sweep.points)
        out << detail::point_key(base, sweep, pt.axis_value) << "," << fmt_num(pt.axis_value)
            << "," << sweep.replications << "," << fmt_num(pt.post_mu_I.mean) << ","
            << fmt_num(pt.post_mu_I.sd) << "," << fmt_num(pt.post_sigma_I.mean) << ","
            << fmt_num(pt.post_sigma_I.sd) << "," << fmt_num(pt.post_mu_G.mean) << ","
            << fmt_num(pt.post_mu_G.sd) << "," << fmt_num(pt.post_sigma_G.mean) << ","
            << fmt_num(pt.post_sigma_G.sd) << "," << fmt_num(pt.revenue.mean) << ","
            << fmt_num(pt.revenue.sd) << "," << fmt_num(pt.executed_trades.mean) << ","
            << fmt_num(pt.executed_trades.sd) << "\n";
    return out.str();
}

// Plot data: whitespace-separated "x mean lo hi", one band per line.
inline std::string plot_data(const SweepResult& sweep,
                             const std::function<Aggregate(const SweepPoint&)>& series) {
    std::ostringstream out;
    for (const auto& pt : sweep.points) {
        Aggregate a = series(pt);
        out << fmt_num(pt.axis_value) << " " << fmt_num(a.mean) << " " << fmt_num(a.mean - a.sd)
            << " " << fmt_num(a.mean + a.sd) << "\n";
    }
    return out.str();
}

} // namespace pricex
