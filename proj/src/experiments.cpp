#include "chaoslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "chaoslab/csv.hpp"
#include "chaoslab/flows.hpp"
#include "chaoslab/gaussian_oracle.hpp"
#include "chaoslab/hierarchy.hpp"
#include "chaoslab/remainder.hpp"

namespace chaoslab {

bool ExperimentOutput::all_pass() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass || v.informational; });
}

namespace {

std::string printf_string(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Verdict check(std::string name, bool pass, std::string message)
{
    return {std::move(name), pass, std::move(message), false};
}

RateFit fit_rows(const std::vector<ScalingRow>& rows)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.emplace_back(static_cast<double>(r.n), r.value);
    return loglog_fit(pts);
}

// Slope verdict that degrades to a failure with a message when the table
// cannot be fitted (zero or negative entries).
Verdict slope_verdict(const std::vector<ScalingRow>& rows, double target, double tol, const std::string& name)
{
    try {
        return verdict(fit_rows(rows), target, tol, name);
    } catch (const Error& e) {
        return check(name, false, std::string("fit failed: ") + e.what());
    }
}

std::string scaling_csv(const std::vector<ScalingRow>& rows, const std::string& value_name)
{
    std::ostringstream os;
    write_scaling_csv(os, rows, value_name);
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentOutput run_oracle_rates(const OracleRatesParams& p)
{
    const auto model = LinearGaussianModel::from(p.model, p.sigma);
    auto t_grid = p.t_grid;
    std::sort(t_grid.begin(), t_grid.end());
    const auto fit_at = std::find(t_grid.begin(), t_grid.end(), p.t_fit);
    if (fit_at == t_grid.end()) throw ConfigError("oracle-rates: t_fit must be one of t_grid");
    const std::size_t fit_index = static_cast<std::size_t>(fit_at - t_grid.begin());
    if (p.n_grid.empty() || p.k_grid.empty()) throw ConfigError("oracle-rates: grids must be nonempty");

    std::ostringstream csv;
    CsvWriter w(csv, {"n", "k", "t", "entropy", "path_entropy"});
    // entropy[n][k][t]
    std::vector<std::vector<std::vector<EntropyRow>>> table;
    for (std::size_t n : p.n_grid) {
        std::vector<std::size_t> ks;
        for (std::size_t k : p.k_grid)
            if (k <= n) ks.push_back(k);
        const auto rows = entropy_profile(model, n, ks, p.mu0, t_grid);
        std::vector<std::vector<EntropyRow>> by_k(p.k_grid.size());
        for (const auto& r : rows) {
            w.row({fmt(n), fmt(r.k), fmt(r.t), fmt(r.entropy), fmt(r.path_entropy)});
            const auto at = std::find(p.k_grid.begin(), p.k_grid.end(), r.k) - p.k_grid.begin();
            by_k[static_cast<std::size_t>(at)].push_back(r);
        }
        table.push_back(std::move(by_k));
    }

    ExperimentOutput out;
    out.tables.push_back({"", csv.str()});

    double largest = 0.0;
    for (const auto& by_n : table)
        for (const auto& by_k : by_n)
            for (const auto& r : by_k) largest = std::max(largest, r.entropy);
    // B = 0 decouples the particles; the oracle then returns round-off only
    if (p.model.B.isZero(0.0) || largest <= 1e-14) {
        out.verdicts.push_back({"entropy rates", true,
                                "degenerate: every entropy vanishes (no interaction); slope verdicts skipped", true});
        return out;
    }

    for (std::size_t ki = 0; ki < p.k_grid.size(); ++ki) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t ni = 0; ni < p.n_grid.size(); ++ni)
            if (!table[ni][ki].empty()) pts.emplace_back(static_cast<double>(p.n_grid[ni]), table[ni][ki][fit_index].entropy);
        const std::string name = printf_string("entropy decays like n^-2 (k=%zu, t=%g)", p.k_grid[ki], p.t_fit);
        if (pts.size() < 2) {
            out.verdicts.push_back(check(name, false, "fewer than two n values admit this k"));
            continue;
        }
        out.verdicts.push_back(verdict(loglog_fit(pts), -2.0, p.n_tolerance, name));
    }
    {
        const std::size_t ni = p.n_grid.size() - 1;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t ki = 0; ki < p.k_grid.size(); ++ki)
            if (!table[ni][ki].empty()) pts.emplace_back(static_cast<double>(p.k_grid[ki]), table[ni][ki][fit_index].entropy);
        const std::string name = printf_string("entropy grows like k^2 (n=%zu, t=%g)", p.n_grid[ni], p.t_fit);
        if (pts.size() < 2)
            out.verdicts.push_back(check(name, false, "fewer than two k values"));
        else
            out.verdicts.push_back(verdict(loglog_fit(pts), 2.0, p.k_tolerance, name));
    }
    if (t_grid.back() > p.early_until && t_grid.front() <= p.early_until) {
        double worst = 0.0;
        std::string where;
        for (std::size_t ni = 0; ni < p.n_grid.size(); ++ni)
            for (std::size_t ki = 0; ki < p.k_grid.size(); ++ki) {
                double early = 0.0, all = 0.0;
                for (const auto& r : table[ni][ki]) {
                    all = std::max(all, r.entropy);
                    if (r.t <= p.early_until) early = std::max(early, r.entropy);
                }
                const double ratio = early > 0.0 ? all / early : (all > 0.0 ? INFINITY : 1.0);
                if (ratio > worst) {
                    worst = ratio;
                    where = printf_string("n=%zu, k=%zu", p.n_grid[ni], p.k_grid[ki]);
                }
            }
        out.verdicts.push_back(check("entropy bounded uniformly in time", worst <= 2.0,
                                     printf_string("max over t / max over t<=%g is %.6f at %s (limit 2)",
                                                   p.early_until, worst, where.c_str())));
    }
    {
        double worst = INFINITY;
        for (const auto& by_n : table)
            for (const auto& by_k : by_n)
                for (const auto& r : by_k) worst = std::min(worst, r.path_entropy - r.entropy);
        out.verdicts.push_back(check("path entropy dominates marginal entropy", worst >= -1e-12,
                                     printf_string("min(path - marginal) = %.3e", worst)));
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_hierarchy_certify(const HierarchyCertifyParams& p)
{
    ExperimentOutput out;
    std::ostringstream csv;
    CsvWriter w(csv, {"n", "a", "c", "p", "R", "k", "f_T", "lemma_rhs", "ratio"});
    double worst = 0.0;
    std::string worst_at;
    bool ordered = true;
    for (std::size_t n : p.n_grid)
        for (double a : p.a_grid)
            for (double c : p.c_grid)
                for (int q : p.p_grid)
                    for (const auto& r : p.r_grid) {
                        HierarchyParams hp;
                        hp.a = a;
                        hp.b = p.b;
                        hp.c = c;
                        hp.p = q;
                        hp.C0 = p.C0;
                        hp.T = p.T;
                        const double n2 = static_cast<double>(n) * static_cast<double>(n);
                        if (r == "zero")
                            hp.R = [](double) { return 0.0; };
                        else if (r == "inverse_n2")
                            hp.R = [n2](double) { return 1.0 / n2; };
                        else
                            throw ConfigError("hierarchy-certify: unknown R preset '" + r + "'");
                        std::vector<double> f0(n);
                        for (std::size_t k = 1; k <= n; ++k) f0[k - 1] = p.C0 * static_cast<double>(k * k) / n2;
                        const auto st = integrate_hierarchy({n, a}, hp, f0);
                        const auto rep = check_lemma_bound(st, f0, hp);
                        ordered = ordered && st.nondecreasing;
                        for (std::size_t k = 1; k <= n; ++k)
                            w.row({fmt(n), fmt(a), fmt(c), fmt(q), r, fmt(k), fmt(st.f[k - 1]), fmt(rep.rhs[k - 1]),
                                   fmt(rep.ratio[k - 1])});
                        if (rep.max_ratio > worst) {
                            worst = rep.max_ratio;
                            worst_at = printf_string("n=%zu a=%g c=%g p=%d R=%s", n, a, c, q, r.c_str());
                        }
                    }
    out.tables.push_back({"", csv.str()});
    out.verdicts.push_back(check("hierarchy solution within the Gronwall-type lemma bound", worst <= 1.0 + 1e-9,
                                 printf_string("max f_T/RHS = %.9f at %s", worst, worst_at.c_str())));
    out.verdicts.push_back(check("hierarchy solution nondecreasing in k", ordered,
                                 ordered ? "f_s and f_T nondecreasing for every parameter set"
                                         : "a solution decreased in k"));

    std::ostringstream mcsv;
    CsvWriter mw(mcsv, {"q", "t", "k", "value", "bound"});
    const YuleGenerator gen{p.moment_n, p.moment_a};
    for (int q = 1; q <= 3; ++q) {
        const auto rep = check_moment_bounds(gen, p.moment_t, q, 16, p.seed);
        for (std::size_t ti = 0; ti < p.moment_t.size(); ++ti)
            for (std::size_t k = 1; k <= gen.n; ++k)
                mw.row({fmt(q), fmt(p.moment_t[ti]), fmt(k), fmt(rep.values[ti][k - 1]),
                        fmt(8.0 * std::exp(q * gen.a * p.moment_t[ti]) * std::pow(static_cast<double>(k), q))});
        out.verdicts.push_back(check(printf_string("Yule semigroup moment bound q=%d", q), rep.violations == 0,
                                     printf_string("%zu violations, max ratio to 8e^{qat}k^q %.6f", rep.violations,
                                                   rep.max_ratio)));
        if (q == 1)
            out.verdicts.push_back(check("Yule semigroup preserves order", rep.monotonicity_failures == 0,
                                         printf_string("%zu of 16 ordered pairs mapped out of order",
                                                       rep.monotonicity_failures)));
    }
    out.tables.push_back({"_moments", mcsv.str()});
    {
        const double t = p.moment_t.empty() ? 1.0 : p.moment_t.back();
        std::vector<double> m1(gen.n);
        for (std::size_t k = 1; k <= gen.n; ++k) m1[k - 1] = static_cast<double>(k);
        const double v = semigroup_apply(gen, m1, t)[0];
        const double rel = std::abs(v - std::exp(gen.a * t)) / std::exp(gen.a * t);
        out.verdicts.push_back(check("first moment from level 1 grows like e^{at}", rel <= 1e-6,
                                     printf_string("relative gap %.3e at t=%g (limit 1e-6)", rel, t)));
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_flows_check(const FlowsCheckParams& p)
{
    ExperimentOutput out;

    // exact linear tangent
    const auto lin = linear_drift(-1.0, 0.0);
    SimConfig tc{1, 1, 1.0, p.tangent_dt, p.tangent_t, p.seed, InitialLaw::scalar_normal(0.0, 1.0), 1};
    const auto lin_flow = ReferenceFlow::mean_path(euler_mean_path(lin, Vec::Zero(1), tc.dt, tc.steps()), tc.dt);
    const auto tangent = simulate_tangent(lin, tc, lin_flow, Vec::Zero(1));
    const double jt = tangent.jacobian.back()(0, 0), exact = std::exp(-p.tangent_t);
    out.verdicts.push_back(check("tangent flow of the linear drift equals e^{-t}", std::abs(jt - exact) <= 1e-4,
                                 printf_string("J_T = %.8f vs %.8f (tolerance 1e-4)", jt, exact)));
    const auto contraction = check_decay(lin, 1.0, p.tangent_t, tangent);
    out.verdicts.push_back(check("tangent flow contracts at rate lambda", contraction.pass,
                                 printf_string("sup |J_t| e^{t} = %.9f", contraction.contraction)));

    // finite differences with common noise
    std::ostringstream fd_csv;
    CsvWriter fw(fd_csv, {"family", "t", "fd", "ode", "rel_error"});
    for (const auto* family : {&p.fd_model, &p.fd_extra}) {
        const auto V = make_family(*family);
        SimConfig c = p.fd_sim;
        c.seed = p.seed;
        const ReferenceFlow flow =
            V.mean_affine ? ReferenceFlow::mean_path(euler_mean_path(V, c.init.gaussian->mean, c.dt, c.steps()), c.dt)
                          : ReferenceFlow::from_trajectory(run_mckean_reference(V, c, p.fd_reference));
        const Vec x0 = Vec::Constant(c.d, p.fd_x0);
        const Vec e = Vec::Unit(c.d, 0) * p.fd_h;
        const auto base = simulate_tangent(V, c, flow, x0);
        const auto up = simulate_tangent(V, c, flow, x0 + e);
        const auto down = simulate_tangent(V, c, flow, x0 - e);
        double worst = 0.0;
        for (std::size_t i = 1; i < base.times.size(); ++i) {
            const Vec fd = (up.base_path[i] - down.base_path[i]) / (2.0 * p.fd_h);
            const Vec ode = base.jacobian[i].col(0);
            const double rel = (fd - ode).norm() / ode.norm();
            worst = std::max(worst, rel);
            if (i % 100 == 0 || i + 1 == base.times.size())
                fw.row({V.name, fmt(base.times[i]), fmt(fd[0]), fmt(ode[0]), fmt(rel)});
        }
        out.verdicts.push_back(check("tangent flow matches finite differences (" + V.name + ")", worst <= 1e-3,
                                     printf_string("max relative error %.3e (limit 1e-3)", worst)));
    }

    // Lions flow
    const auto L = make_family(p.lions_model);
    SimConfig lc = p.lions_sim;
    lc.seed = p.seed;
    const auto lions = simulate_lions(L, lc, Vec::Zero(1), Vec::Constant(1, p.lions_y), p.lions_M);
    std::size_t at = 0;
    while (at + 1 < lions.times.size() && lions.times[at] < p.lions_check_t - 1e-12) ++at;
    const double a = p.lions_model.A(0, 0), b = p.lions_model.B(0, 0);
    const double zeta = std::exp((a + b) * p.lions_check_t) - std::exp(a * p.lions_check_t);
    const double est = lions.xi_law_mean[at](0, 0);
    const double rel = std::abs(est - zeta) / std::abs(zeta);
    const double tol = 5.0 / std::sqrt(static_cast<double>(p.lions_M));
    out.verdicts.push_back(check("Lions flow matches its closed form", rel <= tol,
                                 printf_string("zeta(%g) = %.6f vs %.6f, relative error %.3e (limit %.3e)",
                                               p.lions_check_t, est, zeta, rel, tol)));
    const auto decay = check_decay(L, p.lambda, lc.t_end, lions);
    out.verdicts.push_back(check("Lions flow decays", decay.pass,
                                 printf_string("RMS at t=%g is %.4f of its peak %.4f (limit 0.05)", lc.t_end,
                                               decay.ratio, decay.peak)));

    std::ostringstream csv;
    write_decay_csv(csv, tangent, lions);
    out.tables.push_back({"", csv.str()});
    out.tables.push_back({"_fd", fd_csv.str()});
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_chaos_mc(const ChaosParams& p)
{
    ExperimentOutput out;
    if (p.coupling) {
        const auto V = make_family(p.coupling_model);
        std::vector<ScalingRow> rows;
        for (std::size_t n : p.coupling_n) {
            SimConfig c = p.coupling_sim;
            c.n = n;
            c.record_stride = std::max<std::size_t>(1, c.steps());
            const auto path = euler_mean_path(V, c.init.gaussian->mean, c.dt, c.steps());
            const auto rep = run_synchronous_coupling(V, c, ReferenceFlow::mean_path(path, c.dt), p.coupling_replicas,
                                                      p.workers);
            rows.push_back({n, rep.sup_gap_sq_per_particle, rep.standard_error});
        }
        out.tables.push_back({"_coupling", scaling_csv(rows, "sup_gap_sq")});
        out.verdicts.push_back(slope_verdict(rows, -1.0, p.tolerance, "synchronous coupling gap ~ 1/n"));
    }
    const auto V = make_family(p.model);
    const auto limit = mean_affine_limit(V, p.sim);
    if (p.weak) {
        const double m_T = limit.mean[0];
        const auto tables = weak_chaos_gaps({WeakFunctional::mean_value(), WeakFunctional::centered_quartic(m_T)}, V,
                                            p.sim, p.n_grid, p.weak_replicas, {m_T, 0.0}, p.workers);
        out.tables.push_back({"_weak_mean", scaling_csv(tables[0], "gap")});
        out.tables.push_back({"_weak_quartic", scaling_csv(tables[1], "gap")});
        out.verdicts.push_back(slope_verdict(tables[0], -1.0, p.tolerance, "weak chaos gap ~ 1/n for the mean"));
        out.verdicts.push_back(
            slope_verdict(tables[1], -2.0, p.tolerance, "weak chaos gap ~ 1/n^2 for a second-order vanishing functional"));
    }
    if (p.remainder) {
        RemainderSpec spec{V, limit};
        const auto rows = remainder_scaling(spec, V, p.sim, p.n_grid, p.remainder_replicas, p.workers);
        out.tables.push_back({"_remainder", scaling_csv(rows, "mean_R")});
        out.verdicts.push_back(slope_verdict(rows, -2.0, p.tolerance, "expected remainder ~ 1/n^2"));
    }
    return out;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_quantization_demo(const QuantizationParams& p)
{
    ExperimentOutput out;
    const auto rows = quantization_demo(p.d, p.n_grid, p.replicas, p.seed, p.regularization, p.workers);
    out.tables.push_back({"", scaling_csv(rows, "mean_w1")});
    auto v = slope_verdict(rows, -0.325, 0.125, "empirical W1 to a 3d Gaussian decays slowly (slope in [-0.45, -0.2])");
    v.informational = true;
    out.verdicts.push_back(v);
    return out;
}

}  // namespace chaoslab
