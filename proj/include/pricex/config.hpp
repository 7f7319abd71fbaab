#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricex/io.hpp"
#include "pricex/simulation.hpp"

namespace pricex {

// Flat key/value experiment configuration with three sections:
//
//   [trial]   n, pricing, gamma, k, objective, mode, disutility_scale,
//             seed, quadratic_budget
//   [sweep]   axis, values, replications, methods, jobs
//   [output]  dir, name, plot
//
// `pricing` names a preset (A_0.05 .. A_0.95, flight) or a model file path.
// `methods` lists objective/mode series like "mu_I^D mu_G^C"; when present,
// the sweep runs once per series. `plot` picks the plotted quantity
// (objective, mu_I, sigma_I, mu_G, sigma_G, revenue, trades).
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str(), path);
    }

    static ConfigFile parse_text(const std::string& text, const std::string& path = "<config>") {
        ConfigFile cfg;
        cfg.path_ = path;
        cfg.text_ = text;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw cfg.error(lineno, "malformed section header '" + t + "'");
                section = trim(t.substr(1, t.size() - 2));
                if (section != "trial" && section != "sweep" && section != "output")
                    throw cfg.error(lineno, "unknown section [" + section + "]");
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw cfg.error(lineno, "expected 'key = value', got '" + t + "'");
            if (section.empty())
                throw cfg.error(lineno, "key outside of any [section]");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw cfg.error(lineno, "empty key");
            cfg.entries_[section + "." + key] = {value, lineno};
        }
        return cfg;
    }

    const std::string& path() const { return path_; }
    std::uint64_t hash() const { return fnv1a_hash(text_); }

    bool has(const std::string& dotted) const { return entries_.count(dotted) > 0; }

    std::string get_string(const std::string& dotted, const std::string& fallback) const {
        auto it = entries_.find(dotted);
        return it == entries_.end() ? fallback : it->second.value;
    }

    double get_double(const std::string& dotted, double fallback) const {
        auto it = entries_.find(dotted);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw error(it->second.line, "key '" + dotted + "' expects a number, got '" +
                                             it->second.value + "'");
        }
    }

    long get_long(const std::string& dotted, long fallback) const {
        auto it = entries_.find(dotted);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            long v = std::stol(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw error(it->second.line, "key '" + dotted + "' expects an integer, got '" +
                                             it->second.value + "'");
        }
    }

    std::uint64_t get_u64(const std::string& dotted, std::uint64_t fallback) const {
        auto it = entries_.find(dotted);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            unsigned long long v = std::stoull(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw error(it->second.line, "key '" + dotted + "' expects an unsigned integer, got '" +
                                             it->second.value + "'");
        }
    }

    std::vector<double> get_doubles(const std::string& dotted) const {
        auto it = entries_.find(dotted);
        if (it == entries_.end()) return {};
        std::vector<double> out;
        std::istringstream ls(it->second.value);
        std::string tok;
        while (ls >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw error(it->second.line, "key '" + dotted + "': '" + tok + "' is not a number");
            }
        }
        return out;
    }

    std::vector<std::string> get_strings(const std::string& dotted) const {
        auto it = entries_.find(dotted);
        if (it == entries_.end()) return {};
        std::vector<std::string> out;
        std::istringstream ls(it->second.value);
        std::string tok;
        while (ls >> tok) out.push_back(tok);
        return out;
    }

    int line_of(const std::string& dotted) const {
        auto it = entries_.find(dotted);
        return it == entries_.end() ? 0 : it->second.line;
    }

    std::runtime_error error(int line, const std::string& msg) const {
        return std::runtime_error(path_ + ":" + std::to_string(line) + ": " + msg);
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static std::string strip_comment(const std::string& s) {
        auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::string path_;
    std::string text_;
    std::map<std::string, Entry> entries_;
};

// One objective/mode series, written "mu_I^D" or "sigma_G^C".
struct MethodSeries {
    Objective objective = Objective::mu_individual;
    PriceMode mode = PriceMode::decentralized;

    std::string name() const {
        return std::string(label_of(objective)) + "_" +
               (mode == PriceMode::centralized ? "C" : "D");
    }
};

inline MethodSeries method_from_token(const std::string& token) {
    auto caret = token.find('^');
    if (caret == std::string::npos || caret + 2 != token.size() ||
        (token[caret + 1] != 'C' && token[caret + 1] != 'D'))
        throw std::invalid_argument("bad method '" + token +
                                    "'; expected <objective>^C or <objective>^D, e.g. mu_I^D");
    MethodSeries s;
    s.objective = objective_from_label(token.substr(0, caret));
    s.mode = token[caret + 1] == 'C' ? PriceMode::centralized : PriceMode::decentralized;
    return s;
}

// A fully resolved experiment definition.
struct ExperimentSpec {
    std::string name = "experiment";
    TrialConfig base;
    bool has_sweep = false;
    SweepAxis axis = SweepAxis::capacity;
    std::vector<double> values;
    int replications = 100;
    std::vector<MethodSeries> methods; // empty = just the base objective/mode
    int jobs = 1;
    std::string output_dir = ".";
    std::string plot_quantity = "objective";
    std::uint64_t config_hash = 0;
};

inline ExperimentSpec experiment_from_config(const ConfigFile& cfg) {
    ExperimentSpec spec;
    spec.config_hash = cfg.hash();

    TrialConfig& t = spec.base;
    t.population_size = static_cast<int>(cfg.get_long("trial.n", t.population_size));
    const std::string pricing = cfg.get_string("trial.pricing", "A_0.95");
    try {
        t.model = (pricing == "flight" || pricing.rfind("A_", 0) == 0) ? model_by_name(pricing)
                                                                       : load_pricing_model(pricing);
    } catch (const std::exception& e) {
        if (cfg.has("trial.pricing")) throw cfg.error(cfg.line_of("trial.pricing"), e.what());
        throw;
    }
    t.gamma = cfg.get_double("trial.gamma", t.gamma);
    t.capacity = static_cast<int>(cfg.get_long("trial.k", t.capacity));
    t.disutility_scale = cfg.get_double("trial.disutility_scale", t.disutility_scale);
    t.seed = cfg.get_u64("trial.seed", t.seed);
    t.quadratic_budget = cfg.get_long("trial.quadratic_budget", t.quadratic_budget);
    if (cfg.has("trial.objective")) {
        try {
            t.objective = objective_from_label(cfg.get_string("trial.objective", ""));
        } catch (const std::exception& e) {
            throw cfg.error(cfg.line_of("trial.objective"), e.what());
        }
    }
    if (cfg.has("trial.mode")) {
        try {
            t.mode = mode_from_label(cfg.get_string("trial.mode", ""));
        } catch (const std::exception& e) {
            throw cfg.error(cfg.line_of("trial.mode"), e.what());
        }
    }
    try {
        t.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(cfg.path() + ": " + e.what());
    }

    if (cfg.has("sweep.axis")) {
        spec.has_sweep = true;
        try {
            spec.axis = axis_from_label(cfg.get_string("sweep.axis", ""));
        } catch (const std::exception& e) {
            throw cfg.error(cfg.line_of("sweep.axis"), e.what());
        }
        spec.values = cfg.get_doubles("sweep.values");
        if (spec.values.empty())
            throw cfg.error(cfg.line_of("sweep.axis"), "sweep requires a non-empty 'values' list");
    }
    spec.replications = static_cast<int>(cfg.get_long("sweep.replications", spec.replications));
    if (spec.replications < 1)
        throw cfg.error(cfg.line_of("sweep.replications"), "replications must be >= 1");
    spec.jobs = static_cast<int>(cfg.get_long("sweep.jobs", spec.jobs));
    for (const auto& tok : cfg.get_strings("sweep.methods")) {
        try {
            spec.methods.push_back(method_from_token(tok));
        } catch (const std::exception& e) {
            throw cfg.error(cfg.line_of("sweep.methods"), e.what());
        }
    }

    spec.output_dir = cfg.get_string("output.dir", spec.output_dir);
    spec.name = cfg.get_string("output.name", spec.name);
    spec.plot_quantity = cfg.get_string("output.plot", spec.plot_quantity);
    if (spec.name.empty()) throw std::runtime_error(cfg.path() + ": experiment name is empty");
    return spec;
}

} // namespace pricex
