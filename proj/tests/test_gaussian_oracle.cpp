#include <doctest.h>

#include <cmath>
#include <random>

#include "chaoslab/gaussian_oracle.hpp"

using namespace chaoslab;

namespace {

LinearGaussianModel scalar_model(double a, double b, double sigma = 1.0)
{
    return {Mat::Constant(1, 1, a), Mat::Constant(1, 1, b), Vec::Zero(1), sigma};
}

GaussianMeasure scalar_gaussian(double m, double v) { return {Vec::Constant(1, m), Mat::Constant(1, 1, v)}; }

// Full n x n covariance ODE P' = M P + P M^T + 2 sigma^2 I, M = a I + (b/n) 1 1^T,
// without the exchangeable reduction. RK4 with a fixed small step.
Mat brute_force_cov(double a, double b, double sigma, std::size_t n, double var0, double t)
{
    const Mat M = a * Mat::Identity(n, n) + (b / n) * Mat::Ones(n, n);
    auto rhs = [&](const Mat& P) -> Mat { return M * P + P * M.transpose() + 2 * sigma * sigma * Mat::Identity(n, n); };
    Mat P = var0 * Mat::Identity(n, n);
    const int steps = 20000;
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Mat k1 = rhs(P), k2 = rhs(P + 0.5 * h * k1), k3 = rhs(P + 0.5 * h * k2), k4 = rhs(P + h * k3);
        P += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return P;
}

}  // namespace

TEST_CASE("decoupled particles")
{
    const auto s = evolve_particle_law(scalar_model(-1.0, 0.0), GaussianState::iid(5, scalar_gaussian(0, 0)), 1.0);
    CHECK(s.cov_block(0, 0) == doctest::Approx(0.0));
    CHECK(s.var_block(0, 0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
    CHECK(s.var_block(0, 0) == doctest::Approx(0.864665).epsilon(1e-6));
}

TEST_CASE("exchangeable reduction matches the full matrix ODE")
{
    for (std::size_t n : {2u, 3u, 6u}) {
        const auto s = evolve_particle_law(scalar_model(-1.0, 0.5), GaussianState::iid(n, scalar_gaussian(0, 0.25)), 0.5);
        const Mat P = brute_force_cov(-1.0, 0.5, 1.0, n, 0.25, 0.5);
        CHECK(std::abs(s.var_block(0, 0) - P(0, 0)) <= 1e-8);
        CHECK(std::abs(s.cov_block(0, 0) - P(0, 1)) <= 1e-8);
    }
}

TEST_CASE("limit law")
{
    const auto model = scalar_model(-1.0, 0.5);
    const auto lim = evolve_limit_law(model, {Vec::Constant(1, 1.0), Mat::Zero(1, 1)}, 2.0);
    CHECK(lim.mean[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(lim.mean[0] == doctest::Approx(0.367879).epsilon(1e-6));
    const auto stat = evolve_limit_law(scalar_model(-1.0, 0.0), {Vec::Zero(1), Mat::Zero(1, 1)}, 30.0);
    CHECK(stat.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    const auto still = evolve_limit_law(scalar_model(-1.0, 0.5, 0.0), {Vec::Zero(1), Mat::Zero(1, 1)}, 3.0);
    CHECK(still.cov(0, 0) == 0.0);
    const auto s = evolve_particle_law(scalar_model(-1.0, 0.5, 0.0), GaussianState::iid(4, scalar_gaussian(1, 0)), 2.0);
    CHECK(s.cov_block(0, 0) == 0.0);
    CHECK(s.mean[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("k-marginals")
{
    GaussianState s;
    s.n = 3;
    s.mean = Vec::Constant(1, 0.5);
    s.var_block = Mat::Constant(1, 1, 2.0);
    s.cov_block = Mat::Constant(1, 1, 0.3);
    const auto full = k_marginal(s, 3);
    CHECK(full.cov.rows() == 3);
    CHECK(full.cov(0, 0) == 2.0);
    CHECK(full.cov(1, 2) == 0.3);
    const auto one = k_marginal(s, 1);
    CHECK(one.cov(0, 0) == 2.0);
    CHECK(one.mean[0] == 0.5);
    CHECK_THROWS_AS(k_marginal(s, 4), DomainError);
}

TEST_CASE("marginal entropy against explicit block assembly")
{
    const auto model = scalar_model(-1.0, 0.5);
    const auto mu0 = scalar_gaussian(0.0, 0.25);
    for (std::size_t n : {2u, 4u, 7u}) {
        const auto s = evolve_particle_law(model, GaussianState::iid(n, mu0), 1.0);
        const auto lim = evolve_limit_law(model, {mu0.mean, mu0.cov}, 1.0);
        for (std::size_t k = 1; k <= n; ++k) {
            const auto pik = k_marginal(s, k);
            GaussianMeasure prod{Vec::Constant(k, lim.mean[0]), lim.cov(0, 0) * Mat::Identity(k, k)};
            const double oracle = kl_gaussian(pik, prod);
            CHECK(std::abs(marginal_entropy(s, lim, k) - oracle) <= 1e-10);
            if (k == 1 && n == 2) CHECK(oracle > 0.0);
        }
    }
}

TEST_CASE("entropy vanishes without interaction")
{
    const auto rows = entropy_profile(scalar_model(-1.0, 0.0), 16, {1, 4}, scalar_gaussian(0.3, 0.5), {0.5, 2.0});
    CHECK(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(std::abs(r.entropy) <= 1e-12);
        CHECK(std::abs(r.path_entropy) <= 1e-12);
    }
}

TEST_CASE("path entropy rate")
{
    const auto model = scalar_model(-1.0, 0.5);
    const auto mu0 = scalar_gaussian(1.0, 0.25);
    const std::size_t n = 4;
    const auto s = evolve_particle_law(model, GaussianState::iid(n, mu0), 1.0);
    const auto lim = evolve_limit_law(model, {mu0.mean, mu0.cov}, 1.0);
    const double m = s.mean[0], v = s.var_block(0, 0), c = s.cov_block(0, 0), b = 0.5;

    SUBCASE("Monte Carlo over Gaussian draws, k = 1")
    {
        // E[mean(Y) | Y1] = (Y1 + (n - 1) E[Y2 | Y1]) / n, E[Y2 | Y1] = m + (c / v)(Y1 - m)
        std::mt19937_64 gen(99);
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t draws = 1000000;
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < draws; ++i) {
            const double y1 = m + std::sqrt(v) * z(gen);
            const double cond = (y1 + (n - 1) * (m + c / v * (y1 - m))) / n;
            const double g = b * (lim.mean[0] - cond);
            s1 += g * g;
            s2 += g * g * g * g;
        }
        const double est = s1 / draws / 4.0;
        const double se = std::sqrt((s2 / draws - (s1 / draws) * (s1 / draws)) / draws) / 4.0;
        CHECK(std::abs(path_entropy_rate(model, s, lim, 1) - est) <= 4.0 * se);
    }
    SUBCASE("full information, k = n")
    {
        const double var_mean = (v + (n - 1) * c) / n;
        const double expected = n / 4.0 * b * b * (var_mean + std::pow(lim.mean[0] - m, 2));
        CHECK(path_entropy_rate(model, s, lim, n) == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("no interaction")
    {
        const auto m0 = scalar_model(-1.0, 0.0);
        const auto s0 = evolve_particle_law(m0, GaussianState::iid(n, mu0), 1.0);
        const auto l0 = evolve_limit_law(m0, {mu0.mean, mu0.cov}, 1.0);
        CHECK(path_entropy_rate(m0, s0, l0, 2) == 0.0);
    }
}

TEST_CASE("path entropy dominates the marginal entropy")
{
    const auto rows = entropy_profile(scalar_model(-1.0, 0.5), 32, {1, 2, 4}, scalar_gaussian(0.0, 0.25),
                                      {0.5, 1.0, 2.0});
    for (const auto& r : rows) CHECK(r.path_entropy >= r.entropy - 1e-12);
}

TEST_CASE("two-dimensional model")
{
    LinearGaussianModel model{Mat::Identity(2, 2) * -1.0, Mat::Identity(2, 2) * 0.3, Vec::Zero(2), 1.0};
    model.A(0, 1) = 0.2;
    model.B(1, 0) = 0.1;
    GaussianMeasure mu0{Vec::Zero(2), Mat::Identity(2, 2) * 0.5};
    const auto s = evolve_particle_law(model, GaussianState::iid(3, mu0), 0.7);
    const auto lim = evolve_limit_law(model, {mu0.mean, mu0.cov}, 0.7);
    const auto pik = k_marginal(s, 2);
    Mat prod = Mat::Zero(4, 4);
    prod.block(0, 0, 2, 2) = lim.cov;
    prod.block(2, 2, 2, 2) = lim.cov;
    Vec pm(4);
    pm << lim.mean, lim.mean;
    CHECK(marginal_entropy(s, lim, 2) == doctest::Approx(kl_gaussian(pik, {pm, prod})).epsilon(1e-9));
}

TEST_CASE("invalid inputs")
{
    GaussianState s;
    s.n = 2;
    s.mean = Vec::Zero(1);
    s.var_block = Mat::Constant(1, 1, 1.0);
    s.cov_block = Mat::Constant(1, 1, 2.0);
    CHECK_THROWS_AS(s.validate(), DomainError);
    LinearGaussianModel bad{Mat::Zero(1, 2), Mat::Zero(1, 1), Vec::Zero(1), 1.0};
    CHECK_THROWS(bad.validate());
}
