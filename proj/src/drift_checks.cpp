#include <algorithm>
#include <cmath>
#include <random>

#include "chaoslab/drift.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

namespace {

// Value at h = 0 of the polynomial through (h_i, q_i) (Neville).
Vec extrapolate_to_zero(const std::vector<double>& h, std::vector<Vec> q)
{
    const std::size_t n = h.size();
    for (std::size_t level = 1; level < n; ++level) {
        for (std::size_t i = 0; i + level < n; ++i) {
            const double a = h[i], b = h[i + level];
            q[i] = (a * q[i + 1] - b * q[i]) / (a - b);
        }
    }
    return q[0];
}

void check_grid(const std::vector<double>& h_grid)
{
    if (h_grid.empty()) throw PreconditionError("h_grid must not be empty");
    for (double h : h_grid)
        if (!(h > 0.0 && h <= 0.5)) throw PreconditionError("h_grid entries must lie in (0, 0.5]");
    for (std::size_t i = 0; i < h_grid.size(); ++i)
        for (std::size_t j = i + 1; j < h_grid.size(); ++j)
            if (h_grid[i] == h_grid[j]) throw PreconditionError("h_grid entries must be distinct");
}

template <class Fn>
Vec integrate_difference(const Fn& f, const EmpiricalMeasure& eta, const EmpiricalMeasure& nu)
{
    Vec acc = f(Vec(eta.point(0))) * 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) acc += eta.weight(j) * f(Vec(eta.point(j)));
    for (std::size_t j = 0; j < nu.size(); ++j) acc -= nu.weight(j) * f(Vec(nu.point(j)));
    return acc;
}

FlatDerivativeReport finish(std::vector<Vec> quotients, const std::vector<double>& h_grid,
                            Vec analytic)
{
    FlatDerivativeReport r;
    r.fd_value = extrapolate_to_zero(h_grid, quotients);
    r.analytic_value = std::move(analytic);
    r.quotients = std::move(quotients);
    // relative to max(|analytic|, 1) so that vanishing derivatives are compared absolutely
    r.rel_error = (r.fd_value - r.analytic_value).norm() / std::max(r.analytic_value.norm(), 1.0);
    return r;
}

double bootstrap_se(const std::vector<double>& terms, std::size_t resamples, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) s += terms[pick(gen)];
        m = s / static_cast<double>(terms.size());
    }
    double mu = 0.0;
    for (double m : means) mu += m;
    mu /= static_cast<double>(resamples);
    double var = 0.0;
    for (double m : means) var += (m - mu) * (m - mu);
    return std::sqrt(var / static_cast<double>(resamples - 1));
}

}  // namespace

FlatDerivativeReport check_flat_derivative(const DriftModel& V, const EmpiricalMeasure& nu,
                                           const EmpiricalMeasure& eta, const Vec& x,
                                           const std::vector<double>& h_grid)
{
    V.require(true, false, false, false);
    check_grid(h_grid);
    if (nu.dim() != eta.dim() || nu.dim() != x.size())
        throw UnsupportedDimension("check_flat_derivative: dimension mismatch");

    const Vec base = V(nu.view(), x);
    std::vector<Vec> quotients;
    for (double h : h_grid) {
        const auto mix = mixture(nu.view(), eta.view(), h);
        quotients.push_back((V(mix.view(), x) - base) / h);
    }
    const auto f1 = V.flat1(nu.view());
    return finish(std::move(quotients), h_grid,
                  integrate_difference([&](const Vec& y) { return f1(x, y); }, eta, nu));
}

FlatDerivativeReport check_second_flat_derivative(const DriftModel& V, const EmpiricalMeasure& nu,
                                                  const EmpiricalMeasure& eta, const Vec& x,
                                                  const Vec& y, const std::vector<double>& h_grid)
{
    V.require(true, true, false, false);
    check_grid(h_grid);
    if (nu.dim() != eta.dim() || nu.dim() != x.size() || y.size() != x.size())
        throw UnsupportedDimension("check_second_flat_derivative: dimension mismatch");

    const Vec base = V.flat1(nu.view())(x, y);
    std::vector<Vec> quotients;
    for (double h : h_grid) {
        const auto mix = mixture(nu.view(), eta.view(), h);
        quotients.push_back((V.flat1(mix.view())(x, y) - base) / h);
    }
    const auto f2 = V.flat2(nu.view());
    return finish(std::move(quotients), h_grid,
                  integrate_difference([&](const Vec& z) { return f2(x, y, z); }, eta, nu));
}

PairSampler gaussian_pair_sampler(int dim, std::uint64_t seed, const GaussianPairOptions& o)
{
    if (dim < 1) throw UnsupportedDimension("gaussian_pair_sampler: dim must be positive");
    if (!(std::abs(o.correlation) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
    const KeyedNormal rng(seed, 0, Stream::sampler);
    const double rho = o.correlation, rho_c = std::sqrt(1.0 - rho * rho);
    return [=](std::uint64_t index) {
        Vec x(dim), y(dim);
        for (int j = 0; j < dim; ++j) {
            const double z1 = rng.normal(index, static_cast<std::uint64_t>(j));
            const double z2 = rng.normal(index, static_cast<std::uint64_t>(dim + j));
            x[j] = o.x_mean + o.x_scale * z1;
            y[j] = o.y_mean + o.y_scale * (rho * z1 + rho_c * z2);
        }
        return std::make_pair(x, y);
    };
}

MonotonicityReport check_monotonicity(const DriftModel& V, const PairSampler& pairs, double lambda,
                                      std::size_t n_samples, std::uint64_t bootstrap_seed)
{
    if (n_samples < 1000) throw PreconditionError("check_monotonicity needs at least 1000 samples");
    V.require(false, false, false, false);
    const int d = V.dim;
    std::vector<double> xs(n_samples * d), ys(n_samples * d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        auto [x, y] = pairs(i);
        if (x.size() != d || y.size() != d)
            throw UnsupportedDimension("check_monotonicity: sampler dimension mismatch");
        std::copy(x.data(), x.data() + d, xs.begin() + i * d);
        std::copy(y.data(), y.data() + d, ys.begin() + i * d);
    }
    const MeasureView law_x{xs, {}, d}, law_y{ys, {}, d};
    std::vector<double> vx(xs.size()), vy(ys.size());
    V.eval(law_x, xs, vx);
    V.eval(law_y, ys, vy);

    std::vector<double> terms(n_samples);
    double lhs = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double inner = 0.0, dist2 = 0.0;
        for (int j = 0; j < d; ++j) {
            const double dx = xs[i * d + j] - ys[i * d + j];
            inner += (vx[i * d + j] - vy[i * d + j]) * dx;
            dist2 += dx * dx;
        }
        lhs += inner;
        sq += dist2;
        terms[i] = inner + lambda * dist2;
    }
    const double count = static_cast<double>(n_samples);
    MonotonicityReport r;
    r.empirical_lhs = lhs / count;
    r.empirical_rhs = -lambda * sq / count;
    r.margin = r.empirical_rhs - r.empirical_lhs;
    r.standard_error = bootstrap_se(terms, 200, bootstrap_seed);
    const double round_off = 1e-12 * (std::abs(r.empirical_rhs) + std::abs(r.empirical_lhs));
    r.pass = r.empirical_lhs <= r.empirical_rhs + 3.0 * r.standard_error + round_off;
    return r;
}

QuadraticFormReport check_quadratic_form(const DriftModel& V, const PairSampler& sampler, double lambda,
                                         std::size_t n_samples)
{
    V.require(false, false, true, true);
    if (n_samples < 2) throw PreconditionError("check_quadratic_form needs at least 2 samples");
    const int d = V.dim;
    std::vector<Vec> X(n_samples), Y(n_samples), X1(n_samples), Y1(n_samples);
    std::vector<double> coords(n_samples * d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        std::tie(X[i], Y[i]) = sampler(i);
        std::tie(X1[i], Y1[i]) = sampler(n_samples + i);
        if (X[i].size() != d || Y[i].size() != d)
            throw UnsupportedDimension("check_quadratic_form: sampler dimension mismatch");
        std::copy(X[i].data(), X[i].data() + d, coords.begin() + i * d);
    }
    const MeasureView law{coords, {}, d};
    const auto wg = V.wgrad(law);
    const auto xg = V.xgrad(law);

    double form = 0.0, rhs = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double q = Y[i].dot(wg(X[i], X1[i]) * Y1[i]) + Y[i].dot(xg(X[i]) * Y[i]);
        const double y2 = Y[i].squaredNorm();
        form += q;
        rhs += y2;
        const double t = q + lambda * y2;
        s1 += t;
        s2 += t * t;
    }
    const double count = static_cast<double>(n_samples);
    QuadraticFormReport r;
    r.form = form / count;
    r.rhs = -lambda * rhs / count;
    const double m = s1 / count;
    const double var = std::max(0.0, (s2 - count * m * m) / (count - 1.0));
    r.standard_error = std::sqrt(var / count);
    const double round_off = 1e-12 * (std::abs(r.rhs) + std::abs(r.form));
    r.pass = r.form <= r.rhs + 3.0 * r.standard_error + round_off;
    return r;
}

double probe_wgrad_sup(const DriftModel& V, const MeasureView& mu, const std::vector<Vec>& grid)
{
    V.require(false, false, true, false);
    const auto wg = V.wgrad(mu);
    double sup = 0.0;
    for (const auto& x : grid)
        for (const auto& y : grid) {
            const Mat m = wg(x, y);
            sup = std::max(sup, Eigen::JacobiSVD<Mat>(m).singularValues()(0));
        }
    return sup;
}

}  // namespace chaoslab
