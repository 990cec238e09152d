#include <doctest.h>

#include <cmath>
#include <random>

#include "chaoslab/csv.hpp"
#include "chaoslab/ratefit.hpp"
#include "chaoslab/types.hpp"

using namespace chaoslab;

TEST_CASE("exact power laws")
{
    const auto f = loglog_fit({{10.0, 3.0 / 100.0}, {100.0, 3.0 / 10000.0}});
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(std::isnan(f.r_squared));
    for (double c : {0.01, 1.0, 250.0}) {
        const auto g = loglog_fit({{1.0, c}, {2.0, 2 * c}, {4.0, 4 * c}, {8.0, 8 * c}});
        CHECK(g.slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.r_squared == doctest::Approx(1.0));
    }
}

TEST_CASE("fit is invariant under point order and y scale")
{
    std::vector<std::pair<double, double>> pts{{16, 0.3}, {32, 0.11}, {64, 0.04}, {128, 0.012}, {256, 0.0041}};
    auto shuffled = pts;
    std::swap(shuffled[0], shuffled[3]);
    std::swap(shuffled[1], shuffled[4]);
    auto scaled = pts;
    for (auto& p : scaled) p.second *= 8.0;
    const auto a = loglog_fit(pts), b = loglog_fit(shuffled), c = loglog_fit(scaled);
    CHECK(a.slope == b.slope);
    CHECK(a.slope == c.slope);
    CHECK(a.slope_ci == b.slope_ci);
    CHECK(a.slope_ci.first <= a.slope);
    CHECK(a.slope <= a.slope_ci.second);
}

TEST_CASE("calibration under 5% multiplicative noise")
{
    int inside = 0;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 gen(1000 + s);
        std::normal_distribution<double> z(0.0, 0.05);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 8; ++i) {
            const double x = std::pow(2.0, 3 + i);
            pts.push_back({x, std::pow(x, -2.0) * (1.0 + z(gen))});
        }
        const double slope = loglog_fit(pts).slope;
        if (slope >= -2.2 && slope <= -1.8) ++inside;
    }
    CHECK(inside >= 0.99 * seeds);
}

TEST_CASE("invalid inputs")
{
    CHECK_THROWS_AS(loglog_fit({{1.0, 1.0}}), InsufficientData);
    CHECK_THROWS_AS(loglog_fit({{1.0, 1.0}, {1.0, 2.0}}), InsufficientData);
    CHECK_THROWS_AS(loglog_fit({{1.0, 1.0}, {2.0, -1.0}}), DomainError);
    CHECK_THROWS_AS(loglog_fit({{1.0, 1.0}, {2.0, 0.0}}), DomainError);
}

TEST_CASE("verdicts")
{
    RateFit f;
    f.slope = -1.95;
    f.slope_ci = {-2.05, -1.85};
    CHECK(verdict(f, -2.0, 0.3).pass);
    f.slope = -1.2;
    f.slope_ci = {-1.3, -1.1};
    CHECK_FALSE(verdict(f, -2.0, 0.3).pass);
    f.slope = -2.0;
    f.slope_ci = {-2.6, -1.4};
    CHECK(verdict(f, -2.0, 0.2).pass);
    const auto v = verdict(f, -2.0, 0.2, "named");
    CHECK(v.name == "named");
    CHECK_FALSE(v.message.empty());
}

TEST_CASE("CSV formatting round-trips doubles")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(fmt(v)) == v);
    CHECK(fmt(std::size_t{42}) == "42");
}
