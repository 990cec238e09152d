#include <doctest.h>

#include <cmath>

#include "chaoslab/drift.hpp"
#include "chaoslab/rng.hpp"

using namespace chaoslab;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

EmpiricalMeasure cloud(std::size_t n, std::uint64_t seed, double shift, double scale = 1.0)
{
    std::vector<double> v(n);
    KeyedNormal(seed, 0, Stream::sampler).fill(0, v);
    for (auto& x : v) x = shift + scale * x;
    return EmpiricalMeasure::from_scalars(v);
}

DriftModel tanh_model() { return make_family(MeanNonlinearity{Mat::Constant(1, 1, -1.0), SmoothMap::scaled_tanh(0.2)}); }

}  // namespace

TEST_CASE("direct evaluation")
{
    const auto V = linear_drift(-1.0, 0.5);
    const auto mu = EmpiricalMeasure::from_scalars({1.0, 3.0});
    CHECK(V(mu.view(), v1(1.0))[0] == doctest::Approx(0.0));

    const auto W = make_family(PairwiseKernel{PairInteraction::confined_sine(0.5, 1.0), 1});
    // hand-computed: -0.5 x + mean sin(x - y_j)
    const double x = 0.3;
    CHECK(W(mu.view(), v1(x))[0] == doctest::Approx(-0.5 * x + 0.5 * (std::sin(x - 1.0) + std::sin(x - 3.0))));
}

TEST_CASE("batched eval matches pointwise evaluation")
{
    const auto mu = cloud(50, 1, 0.2);
    const std::vector<double> xs{-1.0, 0.0, 0.5, 2.0};
    for (const DriftModel& V :
         {tanh_model(), make_family(PairwiseKernel{PairInteraction::confined_sine(1.0, 0.7), 1}),
          make_family(KernelComposition{OuterMap::confined_tanh(1.0, 0.5), InnerKernel::gaussian_bump(0.8), 1}),
          make_family(LangevinGradient{Potential::quadratic_well(1.0), Potential::logcosh(0.5), Potential::quadratic_well(0.3), 1})}) {
        std::vector<double> out(xs.size());
        V.eval(mu.view(), xs, out);
        for (std::size_t i = 0; i < xs.size(); ++i) CHECK(out[i] == doctest::Approx(V(mu.view(), v1(xs[i]))[0]));
    }
}

TEST_CASE("flat derivative closed forms")
{
    const auto mu = cloud(30, 2, 0.0);
    SUBCASE("pairwise sine is normalised at the origin")
    {
        const auto V = make_family(PairwiseKernel{PairInteraction::confined_sine(0.0, 1.0), 1});
        const auto f1 = V.flat1(mu.view());
        for (double x : {-0.7, 0.4})
            for (double y : {-1.0, 0.0, 2.0})
                CHECK(f1(v1(x), v1(y))[0] == doctest::Approx(std::sin(x - y) - std::sin(x)));
        const auto f2 = V.flat2(mu.view());
        CHECK(f2(v1(0.1), v1(0.2), v1(0.3))[0] == 0.0);
    }
    SUBCASE("mean nonlinearity")
    {
        const auto V = make_family(MeanNonlinearity{Mat::Zero(1, 1), SmoothMap::scaled_sin(1.0)});
        const double m = mean(mu)[0];
        CHECK(V.flat1(mu.view())(v1(0.3), v1(1.5))[0] == doctest::Approx(std::cos(m) * 1.5));
        CHECK(V.flat2(mu.view())(v1(0.3), v1(1.5), v1(-2.0))[0] == doctest::Approx(-std::sin(m) * 1.5 * -2.0));
        const auto centred = EmpiricalMeasure::from_scalars({-1.0, 1.0});
        CHECK(V.flat2(centred.view())(v1(0.3), v1(0.7), v1(0.9))[0] == doctest::Approx(0.0));
        CHECK(V.wgrad(mu.view())(v1(0.0), v1(0.0))(0, 0) == doctest::Approx(std::cos(m)));
    }
}

TEST_CASE("finite-difference consistency of the derivative stack")
{
    const auto nu = cloud(40, 3, 0.0), eta = cloud(25, 4, 0.8, 1.5);
    SUBCASE("affine in the measure")
    {
        const auto r = check_flat_derivative(linear_drift(-1.0, 0.5), nu, eta, v1(0.4));
        CHECK(r.rel_error <= 1e-12);
    }
    SUBCASE("tanh of the mean")
    {
        const auto V = make_family(MeanNonlinearity{Mat::Constant(1, 1, -1.0), SmoothMap::scaled_tanh(1.0)});
        CHECK(check_flat_derivative(V, nu, eta, v1(0.4)).rel_error <= 1e-6);
        CHECK(check_second_flat_derivative(V, nu, eta, v1(0.4), v1(-0.3)).rel_error <= 1e-6);
    }
    SUBCASE("zero perturbation")
    {
        const auto r = check_flat_derivative(tanh_model(), nu, nu, v1(0.1));
        CHECK(std::abs(r.fd_value[0]) <= 1e-11);
        CHECK(std::abs(r.analytic_value[0]) <= 1e-12);
    }
    SUBCASE("kernel composition and Langevin")
    {
        const auto K = make_family(KernelComposition{OuterMap::confined_tanh(1.0, 0.5), InnerKernel::gaussian_bump(0.8), 1});
        CHECK(check_flat_derivative(K, nu, eta, v1(0.2)).rel_error <= 1e-6);
        CHECK(check_second_flat_derivative(K, nu, eta, v1(0.2), v1(0.5)).rel_error <= 1e-6);
        const auto L = make_family(LangevinGradient{Potential::quadratic_well(1.0), Potential::logcosh(0.5),
                                                    Potential::quadratic_well(0.3), 1});
        CHECK(check_flat_derivative(L, nu, eta, v1(0.2)).rel_error <= 1e-6);
        CHECK(check_second_flat_derivative(L, nu, eta, v1(0.2), v1(0.5)).rel_error <= 1e-6);
    }
    SUBCASE("two-dimensional mean nonlinearity")
    {
        std::vector<Vec> a, b;
        for (int i = 0; i < 20; ++i) {
            Vec p(2), q(2);
            p << std::sin(i), std::cos(1.3 * i);
            q << 0.5 + std::cos(i), std::sin(0.7 * i);
            a.push_back(p);
            b.push_back(q);
        }
        Mat A(2, 2);
        A << -1.0, 0.2, 0.0, -0.8;
        const auto V = make_family(MeanNonlinearity{A, SmoothMap::scaled_tanh(0.6)});
        Vec x(2);
        x << 0.3, -0.2;
        CHECK(check_flat_derivative(V, EmpiricalMeasure::from_points(a), EmpiricalMeasure::from_points(b), x).rel_error <=
              1e-6);
    }
}

TEST_CASE("missing derivative slots are reported")
{
    const auto L = make_family(LangevinGradient{Potential::quadratic_well(1.0), Potential::logcosh(0.5),
                                                Potential::logcosh(1.0), 1});
    CHECK_THROWS_AS(L.require(true, true, false, false), CapabilityError);
    const auto mu = cloud(10, 1, 0.0);
    CHECK_THROWS_AS(check_second_flat_derivative(L, mu, mu, v1(0.0), v1(0.0)), CapabilityError);
}

TEST_CASE("displacement monotonicity")
{
    SUBCASE("identity drift is exactly lambda = 1")
    {
        const auto r = check_monotonicity(linear_drift(-1.0, 0.0), gaussian_pair_sampler(1, 5), 1.0, 2000);
        CHECK(r.pass);
        CHECK(std::abs(r.margin) <= 1e-12);
    }
    SUBCASE("sign-flipped drift fails")
    {
        CHECK_FALSE(check_monotonicity(linear_drift(1.0, 0.0), gaussian_pair_sampler(1, 5), 0.5, 2000).pass);
    }
    SUBCASE("linear mean field against the Gaussian computation")
    {
        GaussianPairOptions o;
        o.x_mean = 1.0;
        o.correlation = 0.3;
        const auto r = check_monotonicity(linear_drift(-1.0, 0.5), gaussian_pair_sampler(1, 9, o), 0.5, 4000);
        CHECK(r.pass);
        // E|X-Y|^2 = 1 + 1 - 2(0.3) + 1^2, lhs = -E|X-Y|^2 + 0.5 (EX - EY)^2
        CHECK(r.empirical_lhs == doctest::Approx(-2.4 + 0.5).epsilon(0.05));
        CHECK(r.empirical_rhs == doctest::Approx(-0.5 * 2.4).epsilon(0.05));
    }
    SUBCASE("too few samples")
    {
        CHECK_THROWS_AS(check_monotonicity(linear_drift(-1.0, 0.0), gaussian_pair_sampler(1, 5), 1.0, 10),
                        PreconditionError);
    }
}

TEST_CASE("Lions quadratic form")
{
    const auto r = check_quadratic_form(linear_drift(-1.0, 0.0), gaussian_pair_sampler(1, 3), 1.0, 4000);
    CHECK(r.pass);
    CHECK(r.form == doctest::Approx(r.rhs));
    const auto lin = check_quadratic_form(linear_drift(-1.0, 0.5), gaussian_pair_sampler(1, 3), 1.0, 4000);
    CHECK(lin.pass);
    CHECK(lin.form == doctest::Approx(lin.rhs).epsilon(0.05));
    CHECK_FALSE(check_quadratic_form(linear_drift(1.0, 0.5), gaussian_pair_sampler(1, 3), 0.5, 4000).pass);
}

TEST_CASE("Wasserstein gradient bound")
{
    const auto V = tanh_model();
    const auto mu = cloud(20, 1, 0.0);
    std::vector<Vec> grid;
    for (int i = -5; i <= 5; ++i) grid.push_back(v1(0.5 * i));
    const double sup = probe_wgrad_sup(V, mu.view(), grid);
    CHECK(sup <= 0.2 + 1e-12);
    CHECK(sup == doctest::Approx(0.2 / std::pow(std::cosh(mean(mu)[0]), 2)));
}
