#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chaoslab/flows.hpp"

using namespace chaoslab;

namespace {

SimConfig scalar_cfg(double sigma, double dt, double t_end, InitialLaw init, std::size_t stride = 1)
{
    SimConfig c;
    c.n = 1;
    c.sigma = sigma;
    c.dt = dt;
    c.t_end = t_end;
    c.seed = 5;
    c.init = std::move(init);
    c.record_stride = stride;
    return c;
}

ReferenceFlow mean_flow(const DriftModel& V, const SimConfig& cfg, double m0)
{
    return ReferenceFlow::mean_path(euler_mean_path(V, Vec::Constant(1, m0), cfg.dt, cfg.steps()), cfg.dt);
}

}  // namespace

TEST_CASE("tangent flow of a linear drift")
{
    const auto V = linear_drift(-1.0, 0.0);
    const auto cfg = scalar_cfg(1.0, 1e-4, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const auto tf = simulate_tangent(V, cfg, mean_flow(V, cfg, 0.0), Vec::Constant(1, 0.3));
    CHECK(tf.jacobian.front()(0, 0) == 1.0);
    CHECK(std::abs(tf.jacobian.back()(0, 0) - std::exp(-1.0)) <= 1e-4);
    const auto rep = check_decay(V, 1.0, 1.0, tf);
    CHECK(rep.pass);
}

TEST_CASE("tangent flow without dynamics is the identity")
{
    const auto V = linear_drift(0.0, 0.0);
    const auto cfg = scalar_cfg(0.0, 0.01, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const auto tf = simulate_tangent(V, cfg, mean_flow(V, cfg, 0.0), Vec::Constant(1, 2.0));
    for (const auto& J : tf.jacobian) CHECK(J(0, 0) == 1.0);
}

TEST_CASE("tangent flow against a coupled finite difference")
{
    const auto V = make_family(MeanNonlinearity{Mat::Constant(1, 1, -1.0), SmoothMap::scaled_tanh(0.2)});
    // nonlinear in x as well, so the check is not trivial
    const auto W = make_family(LangevinGradient{Potential::logcosh(1.0), Potential::quadratic_well(0.5), {}, 1});
    const auto cfg = scalar_cfg(1.0, 1e-3, 1.0, InitialLaw::scalar_normal(1.0, 0.25));
    for (const DriftModel* model : {&V, &W}) {
        const auto flow = model->mean_affine ? mean_flow(*model, cfg, 1.0)
                                             : ReferenceFlow::from_trajectory(run_mckean_reference(*model, cfg, 64));
        const double x0 = 0.5, h = 1e-4;
        const auto base = simulate_tangent(*model, cfg, flow, Vec::Constant(1, x0), 2);
        const auto up = simulate_tangent(*model, cfg, flow, Vec::Constant(1, x0 + h), 2);
        const auto down = simulate_tangent(*model, cfg, flow, Vec::Constant(1, x0 - h), 2);
        const double fd = (up.base_path.back()[0] - down.base_path.back()[0]) / (2 * h);
        CHECK(std::abs(fd - base.jacobian.back()(0, 0)) / std::abs(base.jacobian.back()(0, 0)) <= 1e-3);
    }
}

TEST_CASE("Lions flow closed form")
{
    const auto V = linear_drift(-1.0, 0.5);
    const auto cfg = scalar_cfg(1.0, 1e-3, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const std::size_t M = 2000;
    const auto lf = simulate_lions(V, cfg, Vec::Zero(1), Vec::Zero(1), M);
    const double zeta = std::exp(-0.5) - std::exp(-1.0);
    CHECK(std::abs(lf.xi_law_mean.back()(0, 0) - zeta) / zeta <= 5.0 / std::sqrt(double(M)));
    // pointwise flow: xi' = A xi + B e^{At} + B zeta, xi(0) = 0, by RK4
    double xi = 0.0;
    const int steps = 100000;
    const double h = 1.0 / steps;
    for (int i = 0; i < steps; ++i) {
        auto f = [](double t, double x) { return -x + 0.5 * std::exp(-t) + 0.5 * (std::exp(-0.5 * t) - std::exp(-t)); };
        const double t = i * h;
        const double k1 = f(t, xi), k2 = f(t + h / 2, xi + h / 2 * k1), k3 = f(t + h / 2, xi + h / 2 * k2),
                     k4 = f(t + h, xi + h * k3);
        xi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(std::abs(lf.xi_point.back()(0, 0) - xi) / xi <= 5.0 / std::sqrt(double(M)));
    CHECK_THROWS_AS(simulate_lions(V, cfg, Vec::Zero(1), Vec::Zero(1), 10), PreconditionError);
}

TEST_CASE("Lions flow vanishes without interaction")
{
    const auto V = linear_drift(-1.0, 0.0);
    const auto cfg = scalar_cfg(1.0, 1e-2, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const auto lf = simulate_lions(V, cfg, Vec::Zero(1), Vec::Zero(1), 200);
    for (const auto& z : lf.xi_law_mean) CHECK(z(0, 0) == 0.0);
    for (const auto& z : lf.xi_point) CHECK(z(0, 0) == 0.0);
}

TEST_CASE("Lions flow through the generic path")
{
    // pairwise linear kernel phi(x, y) = -x + 0.5 y equals the linear mean field
    const auto V = make_family(PairwiseKernel{PairInteraction::linear(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 0.5)), 1});
    CHECK_FALSE(V.mean_affine.has_value());
    const auto cfg = scalar_cfg(1.0, 1e-2, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const std::size_t M = 400;
    const auto lf = simulate_lions(V, cfg, Vec::Zero(1), Vec::Zero(1), M);
    // Euler closed form on the same grid: z_{k+1} = z + dt (A z + B (J + z)), J_{k+1} = (1 + A dt) J
    double z = 0.0, J = 1.0;
    for (int k = 0; k < 100; ++k) {
        const double nz = z + 0.01 * (-z + 0.5 * (J + z));
        J *= 1.0 - 0.01;
        z = nz;
    }
    CHECK(lf.xi_law_mean.back()(0, 0) == doctest::Approx(z).epsilon(1e-10));
}

TEST_CASE("decay of the Lions flow")
{
    const auto V = linear_drift(-1.0, 0.5);
    const auto cfg = scalar_cfg(1.0, 1e-3, 10.0, InitialLaw::scalar_normal(0.0, 0.25), 10);
    const auto lf = simulate_lions(V, cfg, Vec::Zero(1), Vec::Zero(1), 1000);
    const auto rep = check_decay(V, 0.5, 10.0, lf);
    CHECK(rep.pass);
    CHECK(rep.peak == doctest::Approx(0.25).epsilon(0.02));
    CHECK(rep.ratio < 0.05);
    std::ostringstream os;
    write_decay_csv(os, simulate_tangent(V, scalar_cfg(1.0, 1e-2, 1.0, InitialLaw::scalar_normal(0, 1)),
                                         mean_flow(V, scalar_cfg(1.0, 1e-2, 1.0, InitialLaw::scalar_normal(0, 1)), 0.0),
                                         Vec::Zero(1)),
                    lf);
    CHECK(os.str().rfind("t,quantity,value\n", 0) == 0);
}

TEST_CASE("decay refuses anti-monotone drifts")
{
    const auto V = linear_drift(1.0, 0.5);
    const auto cfg = scalar_cfg(1.0, 1e-2, 1.0, InitialLaw::scalar_normal(0.0, 0.25));
    const auto tf = simulate_tangent(V, cfg, mean_flow(V, cfg, 0.0), Vec::Zero(1));
    CHECK_THROWS_AS(check_decay(V, 0.5, 1.0, tf), PreconditionError);
}
