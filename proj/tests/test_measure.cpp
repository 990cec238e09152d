#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoslab/measure.hpp"
#include "chaoslab/rng.hpp"

using namespace chaoslab;

namespace {

// W_p^p between equal-size uniform clouds in d = 1 by trying every matching.
double brute_force_wp(std::vector<double> a, const std::vector<double>& b, double p)
{
    std::sort(a.begin(), a.end());
    double best = INFINITY;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
        best = std::min(best, s / a.size());
    } while (std::next_permutation(a.begin(), a.end()));
    return best;
}

std::vector<double> normals(std::size_t count, std::uint64_t seed, double shift = 0.0)
{
    std::vector<double> v(count);
    KeyedNormal(seed, 0, Stream::sampler).fill(0, v);
    for (auto& x : v) x += shift;
    return v;
}

}  // namespace

TEST_CASE("mean of point clouds")
{
    CHECK(mean(EmpiricalMeasure::from_scalars({0.0, 2.0}))[0] == doctest::Approx(1.0));
    CHECK(mean(EmpiricalMeasure::from_scalars({-3.5}))[0] == -3.5);
    Vec e1(2), e2(2);
    e1 << 1, 0;
    e2 << 0, 1;
    const Vec m = mean(EmpiricalMeasure::from_points({e1, e2}));
    CHECK(m[0] == doctest::Approx(0.5));
    CHECK(m[1] == doctest::Approx(0.5));
}

TEST_CASE("exact one-dimensional W1")
{
    const auto a = EmpiricalMeasure::from_scalars({0.0, 2.0});
    const auto b = EmpiricalMeasure::from_scalars({1.0, 3.0});
    CHECK(w1_1d(a, b) == doctest::Approx(brute_force_wp({0.0, 2.0}, {1.0, 3.0}, 1.0)));
    CHECK(w1_1d(a, b) == doctest::Approx(1.0));
    CHECK(w1_1d(a, a) == 0.0);
    CHECK(w1_1d(EmpiricalMeasure::from_scalars({0.0}), EmpiricalMeasure::from_scalars({-2.5})) ==
          doctest::Approx(2.5));

    const std::vector<double> x{0.3, -1.2, 2.0, 0.7, -0.4}, y{1.1, 0.0, -2.2, 0.5, 0.9};
    CHECK(w1_1d(EmpiricalMeasure::from_scalars(x), EmpiricalMeasure::from_scalars(y)) ==
          doctest::Approx(brute_force_wp(x, y, 1.0)).epsilon(1e-12));
}

TEST_CASE("W1 with unequal sizes matches the duplicated cloud")
{
    const std::vector<double> x{0.1, 0.5, -0.3}, y{1.0, -1.0, 0.2, 0.4, 0.0, 2.0};
    std::vector<double> x2;
    for (double v : x) {
        x2.push_back(v);
        x2.push_back(v);
    }
    CHECK(w1_1d(EmpiricalMeasure::from_scalars(x), EmpiricalMeasure::from_scalars(y)) ==
          doctest::Approx(brute_force_wp(x2, y, 1.0)).epsilon(1e-12));
}

TEST_CASE("Sinkhorn divergence")
{
    SUBCASE("identity")
    {
        const auto pts = normals(40, 3);
        const MeasureView mu{pts, {}, 1};
        CHECK(w2_sinkhorn(mu, mu, 0.05) <= 1e-6);
    }
    SUBCASE("single atoms")
    {
        Vec a(2), b(2);
        a << 0, 0;
        b << 3, 4;
        CHECK(w2_sinkhorn(EmpiricalMeasure::atom(a), EmpiricalMeasure::atom(b), 0.1) == doctest::Approx(5.0));
    }
    SUBCASE("agrees with sorted-quantile W2 in d = 1")
    {
        auto x = normals(64, 11), y = normals(64, 12, 0.7);
        std::vector<double> sx = x, sy = y;
        std::sort(sx.begin(), sx.end());
        std::sort(sy.begin(), sy.end());
        double s = 0.0;
        for (std::size_t i = 0; i < 64; ++i) s += (sx[i] - sy[i]) * (sx[i] - sy[i]);
        const double exact = std::sqrt(s / 64.0);
        const double est = w2_sinkhorn(MeasureView{x, {}, 1}, MeasureView{y, {}, 1}, 1e-3);
        CHECK(std::abs(est - exact) <= 0.02 * exact);
    }
    SUBCASE("monotone in the regularization")
    {
        auto x = normals(30, 5), y = normals(30, 6, 0.4);
        const MeasureView mx{x, {}, 1}, my{y, {}, 1};
        double prev = INFINITY;
        for (double reg : {0.01, 0.05, 0.2, 1.0}) {
            const double v = w2_sinkhorn(mx, my, reg);
            CHECK(v <= prev + 1e-9);
            prev = v;
        }
    }
    SUBCASE("W1 cost on identical clouds")
    {
        const auto pts = normals(24, 8);
        SinkhornOptions o;
        o.cost_power = 1;
        CHECK(sinkhorn_divergence(MeasureView{pts, {}, 3}, MeasureView{pts, {}, 3}, 0.05, o).distance <= 1e-6);
    }
    SUBCASE("iteration limit")
    {
        auto x = normals(20, 1), y = normals(20, 2, 1.0);
        SinkhornOptions o;
        o.max_iterations = 3;
        o.anneal = false;
        CHECK_THROWS_AS(sinkhorn_divergence(MeasureView{x, {}, 1}, MeasureView{y, {}, 1}, 1e-3, o), IterationLimit);
    }
}

TEST_CASE("Gaussian KL and W2 closed forms")
{
    auto g = [](double m, double v) { return GaussianMeasure{Vec::Constant(1, m), Mat::Constant(1, 1, v)}; };
    CHECK(kl_gaussian(g(0, 1), g(0, 1)) == 0.0);
    CHECK(kl_gaussian(g(1, 1), g(0, 1)) == doctest::Approx(0.5));
    CHECK(kl_gaussian(g(0, 2), g(0, 1)) == doctest::Approx(0.5 * (1.0 - std::log(2.0))).epsilon(1e-12));
    CHECK(kl_gaussian(g(0, 2), g(0, 1)) == doctest::Approx(0.153426).epsilon(1e-6));
    CHECK(std::isinf(kl_gaussian(g(0, 0), g(0, 1))));
    CHECK_THROWS_AS(kl_gaussian(g(0, 1), g(0, 0)), SingularCovariance);

    CHECK(w2_gaussian(g(0, 1), g(0, 1)) == doctest::Approx(0.0));
    CHECK(w2_gaussian(g(0, 1), g(3, 1)) == doctest::Approx(3.0));
    CHECK(w2_gaussian(g(0, 4), g(0, 1)) == doctest::Approx(1.0));

    // d = 2 KL against the textbook trace/log-det formula
    GaussianMeasure p{Vec::Zero(2), Mat::Identity(2, 2)}, q{Vec::Ones(2), Mat::Identity(2, 2)};
    p.cov << 2.0, 0.3, 0.3, 1.0;
    q.cov << 1.5, -0.2, -0.2, 0.8;
    const Mat qi = q.cov.inverse();
    const Vec dm = q.mean - p.mean;
    const double oracle =
        0.5 * ((qi * p.cov).trace() + dm.dot(qi * dm) - 2.0 + std::log(q.cov.determinant() / p.cov.determinant()));
    CHECK(kl_gaussian(p, q) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("KL kernel is accurate near zero")
{
    CHECK(kl_kernel(1e-9) == doctest::Approx(5e-19).epsilon(1e-6));
    CHECK(kl_kernel(1.0) == doctest::Approx(1.0 - std::log(2.0)));
}

TEST_CASE("mixture weights")
{
    const auto a = EmpiricalMeasure::from_scalars({0.0, 1.0});
    const auto b = EmpiricalMeasure::from_scalars({4.0});
    const auto m = mixture(a.view(), b.view(), 0.25);
    CHECK(mean(m)[0] == doctest::Approx(0.75 * 0.5 + 0.25 * 4.0));
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) total += m.weight(i);
    CHECK(total == doctest::Approx(1.0));
}
