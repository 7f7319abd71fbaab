#include <catch2/catch_amalgamated.hpp>

#include "pricex/fairness.hpp"
#include "pricex/rng.hpp"

using namespace pricex;

namespace {

std::vector<std::vector<int>> equal_groups(int n, int k) {
    std::vector<std::vector<int>> g(k);
    for (int i = 0; i < n; ++i) g[i % k].push_back(i);
    return g;
}

} // namespace

TEST_CASE("constant net costs") {
    std::vector<double> w(25, 0.5);
    FairnessReport r = fairness_metrics(w, equal_groups(25, 5));
    REQUIRE(r.mu_individual == Catch::Approx(0.5));
    REQUIRE(r.sigma_individual == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(r.mu_group == Catch::Approx(0.5));
    REQUIRE(r.sigma_group == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("two singleton groups") {
    FairnessReport r = fairness_metrics({0.0, 1.0}, {{0}, {1}});
    REQUIRE(r.mu_individual == Catch::Approx(0.5));
    REQUIRE(r.sigma_individual == Catch::Approx(0.5));
    REQUIRE(r.mu_group == Catch::Approx(0.5));
    REQUIRE(r.sigma_group == Catch::Approx(0.5));
}

TEST_CASE("group mean equals individual mean for equal group sizes") {
    Rng rng(31);
    for (int iter = 0; iter < 100; ++iter) {
        int k = 2 + static_cast<int>(rng.uniform() * 5);
        int per = 1 + static_cast<int>(rng.uniform() * 10);
        int n = k * per;
        std::vector<double> w(n);
        for (double& x : w) x = rng.uniform(-2.0, 2.0);
        FairnessReport r = fairness_metrics(w, equal_groups(n, k));
        REQUIRE(r.mu_group == Catch::Approx(r.mu_individual).margin(1e-12));
        // law of total variance: group-mean spread cannot exceed individual spread
        REQUIRE(r.sigma_group <= r.sigma_individual + 1e-12);
    }
}

TEST_CASE("shift and scale covariance") {
    Rng rng(37);
    std::vector<double> w(40);
    for (double& x : w) x = rng.uniform(0.0, 1.0);
    auto groups = equal_groups(40, 4);
    FairnessReport base = fairness_metrics(w, groups);

    std::vector<double> shifted = w;
    for (double& x : shifted) x += 0.7;
    FairnessReport s = fairness_metrics(shifted, groups);
    REQUIRE(s.mu_individual == Catch::Approx(base.mu_individual + 0.7).margin(1e-12));
    REQUIRE(s.mu_group == Catch::Approx(base.mu_group + 0.7).margin(1e-12));
    REQUIRE(s.sigma_individual == Catch::Approx(base.sigma_individual).margin(1e-12));
    REQUIRE(s.sigma_group == Catch::Approx(base.sigma_group).margin(1e-12));

    std::vector<double> scaled = w;
    for (double& x : scaled) x *= 3.0;
    FairnessReport sc = fairness_metrics(scaled, groups);
    REQUIRE(sc.mu_individual == Catch::Approx(3.0 * base.mu_individual).margin(1e-12));
    REQUIRE(sc.sigma_individual == Catch::Approx(3.0 * base.sigma_individual).margin(1e-12));
    REQUIRE(sc.mu_group == Catch::Approx(3.0 * base.mu_group).margin(1e-12));
    REQUIRE(sc.sigma_group == Catch::Approx(3.0 * base.sigma_group).margin(1e-12));
}

TEST_CASE("fairness_metrics input validation") {
    REQUIRE_THROWS_AS(fairness_metrics({}, {{0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(fairness_metrics({1.0, 2.0}, {{0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(fairness_metrics({1.0}, {{0}, {}}), std::invalid_argument);
}

TEST_CASE("feasibility report") {
    FairnessReport pre{0.503, 0.284, 0.499, 0.283};
    FairnessReport post{0.166, 0.759, 0.160, 0.366};
    auto rows = feasibility_report(pre, post);
    REQUIRE(rows.size() == 4);
    REQUIRE(rows[0].metric == "mu_I");
    REQUIRE(rows[0].percent_change.has_value());
    REQUIRE(*rows[0].percent_change == Catch::Approx(-67.0).margin(0.5));
    REQUIRE(rows[1].metric == "sigma_I");
    REQUIRE(*rows[1].percent_change == Catch::Approx(167.25).margin(0.5));

    auto same = feasibility_report(pre, pre);
    for (const auto& row : same) REQUIRE(*row.percent_change == Catch::Approx(0.0).margin(1e-12));

    FairnessReport zero{0.0, 0.0, 0.0, 0.0};
    auto undef = feasibility_report(zero, post);
    for (const auto& row : undef) {
        REQUIRE_FALSE(row.percent_change.has_value());
        REQUIRE(row.delta > 0.0);
    }
}
