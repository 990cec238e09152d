#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <string>

#include "chaoslab/measure.hpp"

namespace chaoslab {

namespace {

// Row-major cost matrix between two clouds.
std::vector<double> cost_matrix(const MeasureView& x, const MeasureView& y, int power)
{
    const std::size_t n = x.size(), m = y.size();
    std::vector<double> c(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.point(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double sq = (xi - y.point(j)).squaredNorm();
            c[i * m + j] = (power == 2) ? sq : std::sqrt(sq);
        }
    }
    return c;
}

std::vector<double> log_weights(const MeasureView& mu)
{
    std::vector<double> w(mu.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::log(mu.weight(i));
    return w;
}

// -eps * log sum_j exp(logw_j + (pot_j - c_j) / eps), strided access into c
double soft_min(const double* c, std::size_t stride, const std::vector<double>& logw,
                const std::vector<double>& pot, double eps, std::vector<double>& scratch)
{
    const std::size_t m = logw.size();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        scratch[j] = logw[j] + (pot[j] - c[j * stride]) / eps;
        top = std::max(top, scratch[j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(scratch[j] - top);
    return -eps * (top + std::log(s));
}

std::string short_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

constexpr std::size_t kNewtonMaxSize = 1000;
constexpr std::size_t kNewtonSteps = 40;

// Damped Newton ascent on the dual
//   D(f, g) = <a, f> + <b, g> - eps sum_ij a_i b_j exp((f_i + g_j - c_ij) / eps),
// whose Hessian is the plan Laplacian [[diag r, P], [P^T, diag s]] / eps.
// Stops once the L1 marginal violation is below tol; returns the step count.
std::size_t newton_polish(const std::vector<double>& c, const std::vector<double>& la,
                          const std::vector<double>& lb, double eps, std::vector<double>& f,
                          std::vector<double>& g, std::size_t max_steps, double tol)
{
    const std::size_t n = f.size(), m = g.size(), N = n + m;
    Mat P(n, m);
    Vec r(n), s(m), grad(N);
    auto plan = [&](const std::vector<double>& ff, const std::vector<double>& gg) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) P(i, j) = std::exp(la[i] + lb[j] + (ff[i] + gg[j] - c[i * m + j]) / eps);
        r = P.rowwise().sum();
        s = P.colwise().sum().transpose();
    };
    auto dual = [&](const std::vector<double>& ff, const std::vector<double>& gg) {
        double v = -eps * P.sum();
        for (std::size_t i = 0; i < n; ++i) v += std::exp(la[i]) * ff[i];
        for (std::size_t j = 0; j < m; ++j) v += std::exp(lb[j]) * gg[j];
        return v;
    };
    plan(f, g);
    double value = dual(f, g);
    std::size_t steps = 0;
    std::vector<double> f2(n), g2(m);
    for (; steps < max_steps; ++steps) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = std::exp(la[i]) - r[i];
            err += std::abs(grad[i]);
        }
        for (std::size_t j = 0; j < m; ++j) {
            grad[n + j] = std::exp(lb[j]) - s[j];
            err += std::abs(grad[n + j]);
        }
        if (err < tol) break;
        Mat H(N, N);
        H.setZero();
        H.topLeftCorner(n, n).diagonal() = r;
        H.bottomRightCorner(m, m).diagonal() = s;
        H.topRightCorner(n, m) = P;
        H.bottomLeftCorner(m, n) = P.transpose();
        H /= eps;
        // (1, -1) is a null direction; a tiny ridge pins it
        H.diagonal().array() += 1e-12 * H.diagonal().maxCoeff();
        const Vec step = H.ldlt().solve(grad);
        if (!step.allFinite()) break;
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) f2[i] = f[i] + t * step[i];
            for (std::size_t j = 0; j < m; ++j) g2[j] = g[j] + t * step[n + j];
            plan(f2, g2);
            const double v = dual(f2, g2);
            if (v >= value) {
                f.swap(f2);
                g.swap(g2);
                value = v;
                moved = true;
                break;
            }
        }
        if (!moved) {
            plan(f, g);
            break;
        }
    }
    return steps;
}

struct EntropicOT {
    double value = 0.0;
    std::size_t iterations = 0;
};

// Entropic OT dual value <a,f> + <b,g> by log-domain Sinkhorn with
// epsilon-scaling. Convergence: L1 row-marginal violation below tolerance.
EntropicOT solve(const MeasureView& x, const MeasureView& y, double eps,
                 const SinkhornOptions& opt)
{
    const std::size_t n = x.size(), m = y.size();
    const auto c = cost_matrix(x, y, opt.cost_power);
    const auto la = log_weights(x), lb = log_weights(y);
    std::vector<double> f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));

    auto f_update = [&](double e) {
        for (std::size_t i = 0; i < n; ++i) f[i] = soft_min(&c[i * m], 1, lb, g, e, scratch);
    };
    auto g_update = [&](double e) {
        for (std::size_t j = 0; j < m; ++j) g[j] = soft_min(&c[j], m, la, f, e, scratch);
    };
    // row sums r_i of the plan after a g-update (columns are then exact)
    auto violation = [&](double e, std::vector<double>* rows) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                r += std::exp(la[i] + lb[j] + (f[i] + g[j] - c[i * m + j]) / e);
            if (rows) (*rows)[i] = r;
            err += std::abs(r - std::exp(la[i]));
        }
        return err;
    };

    std::size_t iters = 0;
    if (opt.anneal) {
        const double top = *std::max_element(c.begin(), c.end());
        for (double e = std::max(top, eps); e > eps * 1.0001; e *= 0.5) {
            for (int k = 0; k < 20 && iters < opt.max_iterations; ++k, ++iters) {
                f_update(e);
                g_update(e);
            }
        }
    }
    // Near-permutation plans make the last digits very slow; small problems
    // keep a few iterations back for a Newton polish of the dual.
    const bool polish = n + m <= kNewtonMaxSize;
    const std::size_t reserve = polish ? std::min<std::size_t>(kNewtonSteps, opt.max_iterations / 2) : 0;
    double err = std::numeric_limits<double>::infinity();
    while (iters < opt.max_iterations - reserve) {
        f_update(eps);
        g_update(eps);
        ++iters;
        if (iters % 5 == 0 || iters == opt.max_iterations) {
            err = violation(eps, nullptr);
            if (err < opt.tolerance) break;
        }
    }
    if (polish && !(err < opt.tolerance)) {
        iters += newton_polish(c, la, lb, eps, f, g, reserve - 1, opt.tolerance);
        f_update(eps);
        g_update(eps);
        ++iters;
        err = violation(eps, nullptr);
    }
    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += std::exp(la[i]) * f[i];
    for (std::size_t j = 0; j < m; ++j) dual += std::exp(lb[j]) * g[j];
    if (!(err < opt.tolerance)) {
        std::vector<double> rows(n);
        violation(eps, &rows);
        double gap = 0.0, mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gap += f[i] * (rows[i] - std::exp(la[i]));
            mass += rows[i];
        }
        gap -= eps * (mass - 1.0);
        throw IterationLimit("sinkhorn: no convergence after " + std::to_string(iters) +
                                 " iterations (marginal violation " + short_num(err) + ")",
                             std::abs(gap), iters);
    }
    return {dual, iters};
}

// OT_e(mu, mu) has f = g at the optimum; the averaged update
// f <- (f + T(f)) / 2 avoids the slow oscillation of the alternating scheme.
EntropicOT solve_symmetric(const MeasureView& x, double eps, const SinkhornOptions& opt)
{
    const std::size_t n = x.size();
    const auto c = cost_matrix(x, x, opt.cost_power);
    const auto la = log_weights(x);
    std::vector<double> f(n, 0.0), next(n), scratch(n);

    auto update = [&](double e) {
        for (std::size_t i = 0; i < n; ++i) next[i] = soft_min(&c[i * n], 1, la, f, e, scratch);
        for (std::size_t i = 0; i < n; ++i) f[i] = 0.5 * (f[i] + next[i]);
    };
    auto violation = [&](double e) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < n; ++j) r += std::exp(la[i] + la[j] + (f[i] + f[j] - c[i * n + j]) / e);
            err += std::abs(r - std::exp(la[i]));
        }
        return err;
    };

    std::size_t iters = 0;
    if (opt.anneal) {
        const double top = *std::max_element(c.begin(), c.end());
        for (double e = std::max(top, eps); e > eps * 1.0001; e *= 0.5)
            for (int k = 0; k < 5 && iters < opt.max_iterations; ++k, ++iters) update(e);
    }
    double err = std::numeric_limits<double>::infinity();
    while (iters < opt.max_iterations) {
        update(eps);
        ++iters;
        err = violation(eps);
        if (err < opt.tolerance) break;
    }
    if (!(err < opt.tolerance))
        throw IterationLimit("sinkhorn: no convergence after " + std::to_string(iters) +
                                 " iterations (symmetric problem, marginal violation " + short_num(err) + ")",
                             err, iters);
    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += 2.0 * std::exp(la[i]) * f[i];
    return {dual, iters};
}

}  // namespace

SinkhornResult sinkhorn_divergence(const MeasureView& mu, const MeasureView& nu,
                                   double regularization, const SinkhornOptions& options)
{
    if (mu.dim != nu.dim) throw UnsupportedDimension("sinkhorn: dimension mismatch");
    if (!(regularization > 0.0)) throw DomainError("sinkhorn: regularization must be positive");
    if (options.cost_power != 1 && options.cost_power != 2)
        throw DomainError("sinkhorn: cost_power must be 1 or 2");
    if (mu.size() > 10000 || nu.size() > 10000)
        throw DomainError("sinkhorn: at most 1e4 points per measure");
    const auto xy = solve(mu, nu, regularization, options);
    const auto xx = solve_symmetric(mu, regularization, options);
    const auto yy = solve_symmetric(nu, regularization, options);
    SinkhornResult out;
    out.divergence = xy.value - 0.5 * (xx.value + yy.value);
    const double clamped = std::max(out.divergence, 0.0);
    out.distance = options.cost_power == 2 ? std::sqrt(clamped) : clamped;
    out.iterations = xy.iterations + xx.iterations + yy.iterations;
    return out;
}

double w2_sinkhorn(const MeasureView& mu, const MeasureView& nu, double regularization)
{
    return sinkhorn_divergence(mu, nu, regularization).distance;
}

}  // namespace chaoslab
