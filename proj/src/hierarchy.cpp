#include "chaoslab/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace chaoslab {

void YuleGenerator::validate() const
{
    if (n < 1) throw DomainError("YuleGenerator: n must be at least 1");
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("YuleGenerator: a must be finite and >= 0");
}

std::vector<double> YuleGenerator::apply(const std::vector<double>& phi) const
{
    if (phi.size() != n) throw DomainError("YuleGenerator: vector length must equal n");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = a * static_cast<double>(i + 1) * (phi[i + 1] - phi[i]);
    return out;
}

namespace {

// Step count with a n dt <= 0.005 and c dt <= 0.005, at least 1000 steps per unit time.
std::size_t rk4_steps(double span, double a, double c, std::size_t n)
{
    if (!(span >= 0.0)) throw DomainError("time span must be >= 0");
    const double rate = std::max({a * static_cast<double>(n), std::abs(c), 5.0});
    return static_cast<std::size_t>(std::ceil(span * rate / 0.01 - 1e-9));
}

void axpy(std::vector<double>& y, double alpha, const std::vector<double>& x, const std::vector<double>& base)
{
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = base[i] + alpha * x[i];
}

// RK4 for phi' = rhs(t, phi, out), allocation-free inside the loop.
template <class Rhs>
std::vector<double> rk4(std::vector<double> phi, double t0, double span, std::size_t steps, const Rhs& rhs)
{
    if (steps == 0) return phi;
    const double h = span / static_cast<double>(steps);
    const std::size_t m = phi.size();
    std::vector<double> tmp(m), k1(m), k2(m), k3(m), k4(m);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * h;
        rhs(t, phi, k1);
        axpy(tmp, 0.5 * h, k1, phi);
        rhs(t + 0.5 * h, tmp, k2);
        axpy(tmp, 0.5 * h, k2, phi);
        rhs(t + 0.5 * h, tmp, k3);
        axpy(tmp, h, k3, phi);
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < m; ++i) phi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return phi;
}

// (G phi)(k) written into out
void yule_apply(const YuleGenerator& gen, const std::vector<double>& phi, std::vector<double>& out)
{
    const std::size_t n = phi.size();
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = gen.a * static_cast<double>(i + 1) * (phi[i + 1] - phi[i]);
    out[n - 1] = 0.0;
}

bool nondecreasing(const std::vector<double>& f)
{
    return std::is_sorted(f.begin(), f.end());
}

std::vector<double> powers(std::size_t n, int q)
{
    std::vector<double> m(n);
    for (std::size_t k = 1; k <= n; ++k) m[k - 1] = std::pow(static_cast<double>(k), q);
    return m;
}

// int_0^span e^{alpha u} du
double exp_integral(double alpha, double span)
{
    if (std::abs(alpha * span) < 1e-12) return span;
    return std::expm1(alpha * span) / alpha;
}

}  // namespace

std::vector<double> semigroup_apply(const YuleGenerator& gen, const std::vector<double>& phi, double t)
{
    gen.validate();
    if (phi.size() != gen.n) throw DomainError("semigroup_apply: vector length must equal n");
    if (!(t >= 0.0)) throw DomainError("semigroup_apply: t must be >= 0");
    return rk4(phi, 0.0, t, rk4_steps(t, gen.a, 0.0, gen.n),
               [&](double, const std::vector<double>& x, std::vector<double>& out) { yule_apply(gen, x, out); });
}

MomentBoundReport check_moment_bounds(const YuleGenerator& gen, const std::vector<double>& t_grid, int q,
                                      std::size_t ordered_pairs, std::uint64_t seed)
{
    if (q < 1 || q > 3) throw DomainError("check_moment_bounds: q must be 1, 2 or 3");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) || (!t_grid.empty() && t_grid.front() < 0.0))
        throw DomainError("check_moment_bounds: t_grid must be nondecreasing and >= 0");
    MomentBoundReport rep;
    auto phi = powers(gen.n, q);
    double now = 0.0;
    for (double t : t_grid) {
        phi = semigroup_apply(gen, phi, t - now);
        now = t;
        rep.values.push_back(phi);
        for (std::size_t k = 1; k <= gen.n; ++k) {
            const double bound = 8.0 * std::exp(q * gen.a * t) * std::pow(static_cast<double>(k), q);
            rep.max_ratio = std::max(rep.max_ratio, phi[k - 1] / bound);
            if (phi[k - 1] > bound) {
                ++rep.violations;
                rep.max_violation = std::max(rep.max_violation, phi[k - 1] - bound);
            }
        }
    }
    const double horizon = t_grid.empty() ? 0.0 : t_grid.back();
    std::mt19937_64 gen64(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t p = 0; p < ordered_pairs; ++p) {
        std::vector<double> psi(gen.n), upper(gen.n);
        for (std::size_t k = 0; k < gen.n; ++k) {
            psi[k] = unit(gen64) - 0.5;
            upper[k] = psi[k] + (unit(gen64) < 0.5 ? 0.0 : unit(gen64));
        }
        const auto lo = semigroup_apply(gen, psi, horizon);
        const auto hi = semigroup_apply(gen, upper, horizon);
        for (std::size_t k = 0; k < gen.n; ++k)
            if (hi[k] < lo[k] - 1e-12) {
                ++rep.monotonicity_failures;
                break;
            }
    }
    return rep;
}

HierarchyState integrate_hierarchy(const YuleGenerator& gen, const HierarchyParams& params,
                                   const std::vector<double>& f0)
{
    gen.validate();
    if (f0.size() != gen.n) throw DomainError("integrate_hierarchy: f0 length must equal n");
    if (params.p != 2 && params.p != 3) throw DomainError("integrate_hierarchy: p must be 2 or 3");
    if (!(params.T >= params.s)) throw DomainError("integrate_hierarchy: need T >= s");
    for (double v : f0)
        if (!(v >= 0.0)) throw PreconditionError("integrate_hierarchy: f0 must be nonnegative");
    const double n2 = static_cast<double>(gen.n) * static_cast<double>(gen.n);
    const auto mp = powers(gen.n, params.p);
    const double span = params.T - params.s;

    HierarchyState st;
    st.f = rk4(f0, params.s, span, rk4_steps(span, gen.a, params.c, gen.n),
               [&](double t, const std::vector<double>& f, std::vector<double>& out) {
                   yule_apply(gen, f, out);
                   const double r = params.R(t);
                   for (std::size_t i = 0; i < f.size(); ++i)
                       out[i] += params.b * mp[i] / n2 + static_cast<double>(i + 1) * r - params.c * f[i];
               });
    st.t = params.T;
    st.nondecreasing = nondecreasing(f0) && nondecreasing(st.f);
    return st;
}

LemmaReport check_lemma_bound(const HierarchyState& result, const std::vector<double>& f0,
                              const HierarchyParams& params)
{
    const std::size_t n = result.f.size();
    if (f0.size() != n) throw DomainError("check_lemma_bound: f0 and f_T lengths differ");
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const double cap = params.C0 * static_cast<double>(k * k) / n2;
        if (f0[k - 1] > cap * (1.0 + 1e-12))
            throw PreconditionError("check_lemma_bound: f_s(k) exceeds C0 k^2/n^2 at k = " + std::to_string(k));
    }
    const double span = params.T - params.s;
    const double a = params.a, c = params.c;
    const double growth = std::exp((2.0 * a - c) * span);
    const double source = exp_integral(a * params.p - c, span);

    // int_s^T e^{(a-c)(t-s)} R_t dt, composite Simpson
    const std::size_t panels = 2000;
    const double w = span / panels;
    double r_int = 0.0;
    for (std::size_t i = 0; i < panels && span > 0.0; ++i) {
        auto g = [&](double u) { return std::exp((a - c) * u) * params.R(params.s + u); };
        const double u = static_cast<double>(i) * w;
        r_int += w / 6.0 * (g(u) + 4.0 * g(u + 0.5 * w) + g(u + w));
    }

    LemmaReport rep;
    for (std::size_t k = 1; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double rhs = 2.0 * params.C0 * kk * kk / n2 * growth +
                           8.0 * params.b * std::pow(kk, params.p) / n2 * source + kk * r_int;
        const double f = result.f[k - 1];
        const double ratio = rhs > 0.0 ? f / rhs : (f > 0.0 ? INFINITY : 0.0);
        rep.rhs.push_back(rhs);
        rep.ratio.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

}  // namespace chaoslab
