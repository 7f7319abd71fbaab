#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pricex/market.hpp"

using namespace pricex;

namespace {

// First moment of Normal(mu, sd) truncated below at zero, by Simpson's rule.
// Independent of the sampling path; used to pin the empirical mean.
double truncated_mean_quadrature(double mu, double sd) {
    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
    const double hi = mu + 12.0 * sd;
    const int steps = 20000; // even
    const double h = hi / steps;
    double mass = 0.0, moment = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double x = i * h;
        double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double density = phi((x - mu) / sd) / sd;
        mass += w * density;
        moment += w * x * density;
    }
    return moment / mass;
}

} // namespace

TEST_CASE("population generation, synthetic setup") {
    PricingModel m = build_synthetic_model(0.95);
    Rng rng(7);
    Population pop = generate_population(100, m, 0.4, 16, 1.0, rng);
    REQUIRE(pop.size() == 100);
    REQUIRE(pop.gamma == 0.4);
    REQUIRE(pop.groups.size() == 5);
    for (const auto& g : pop.groups) REQUIRE(g.size() == 20);
    for (const auto& a : pop.agents) {
        REQUIRE(a.offered_price > 0.0);
        REQUIRE(a.offered_price <= 1.0);
        REQUIRE(a.disutility_mean >= 0.0);
        REQUIRE(a.disutility_mean <= 0.02);
        REQUIRE(a.disutility_sd == 0.01);
        REQUIRE(a.intermediary_capacity == 16);
    }
}

TEST_CASE("population generation, flight setup") {
    PricingModel m = build_flight_model();
    Rng rng(7);
    Population pop = generate_population(100, m, 0.005, 16, 1.0, rng);
    REQUIRE(pop.groups.size() == 9);
    for (const auto& a : pop.agents) {
        REQUIRE(a.disutility_mean >= 0.0);
        REQUIRE(a.disutility_mean <= 1.0);
        REQUIRE(a.disutility_sd == 0.5);
    }
}

TEST_CASE("zero disutility scale reproduces the no-hassle regime") {
    PricingModel m = build_synthetic_model(0.50);
    Rng rng(3);
    Population pop = generate_population(10, m, 0.2, 4, 0.0, rng);
    Rng draws(11);
    for (const auto& a : pop.agents)
        for (int i = 0; i < 10; ++i) REQUIRE(draw_disutility(a, draws) == 0.0);
}

TEST_CASE("population generation rejects bad configuration") {
    PricingModel m = build_synthetic_model(0.95);
    Rng rng(1);
    REQUIRE_THROWS_AS(generate_population(1, m, 0.4, 16, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(generate_population(100, m, 1.0, 16, 1.0, rng), std::invalid_argument);
}

TEST_CASE("round-robin group sizes differ by at most one") {
    PricingModel m = build_synthetic_model(0.95);
    Rng rng(5);
    for (int n : {2, 7, 23, 103}) {
        Population pop = generate_population(n, m, 0.1, 2, 1.0, rng);
        std::size_t lo = 1 << 20, hi = 0;
        for (const auto& g : pop.groups) {
            lo = std::min(lo, g.size());
            hi = std::max(hi, g.size());
        }
        REQUIRE(hi - lo <= 1);
    }
}

TEST_CASE("disutility draws are nonnegative and match the quadrature mean") {
    Agent a;
    a.disutility_mean = 0.01;
    a.disutility_sd = 0.01;
    Rng rng(17);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double eps = draw_disutility(a, rng);
        REQUIRE(eps >= 0.0);
        sum += eps;
    }
    double expected = truncated_mean_quadrature(0.01, 0.01);
    REQUIRE(sum / n == Catch::Approx(expected).margin(0.001));

    Agent degenerate;
    REQUIRE(draw_disutility(degenerate, rng) == 0.0);
}

TEST_CASE("utility evaluation") {
    Agent buyer, inter;
    buyer.offered_price = 0.9;
    inter.offered_price = 0.1;
    inter.id = 1;

    UtilityPair u = evaluate_utilities(buyer, inter, 0.5, 0.0, 0.0, 0.0);
    REQUIRE(u.buyer_utility == Catch::Approx(0.4));
    REQUIRE(u.intermediary_utility == Catch::Approx(0.4));

    u = evaluate_utilities(buyer, inter, 0.9, 0.0, 0.0, 0.0);
    REQUIRE(u.buyer_utility == Catch::Approx(0.0).margin(1e-15));

    u = evaluate_utilities(buyer, inter, 0.5, 0.4, 0.01, 0.02);
    REQUIRE(u.buyer_utility == Catch::Approx(0.39));
    REQUIRE(u.intermediary_utility == Catch::Approx(0.18));

    REQUIRE_THROWS_AS(evaluate_utilities(inter, buyer, 0.5, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("surplus conservation: gamma = 0, eps = 0") {
    Rng rng(23);
    for (int iter = 0; iter < 500; ++iter) {
        Agent buyer, inter;
        inter.id = 1;
        buyer.offered_price = rng.uniform(0.5, 1.0);
        inter.offered_price = rng.uniform(0.01, 0.49);
        double m = rng.uniform(0.0, 1.0);
        UtilityPair u = evaluate_utilities(buyer, inter, m, 0.0, 0.0, 0.0);
        REQUIRE(u.buyer_utility + u.intermediary_utility ==
                Catch::Approx(buyer.offered_price - inter.offered_price).margin(1e-12));
    }
}
