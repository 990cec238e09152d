#include "chaoslab/remainder.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chaoslab/csv.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

Quadrature Quadrature::gauss_legendre_32()
{
    using rule = boost::math::quadrature::gauss<double, 32>;
    Quadrature q;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    for (std::size_t i = x.size(); i-- > 0;) {
        q.nodes.push_back(0.5 * (1.0 - x[i]));
        q.weights.push_back(0.5 * w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        q.nodes.push_back(0.5 * (1.0 + x[i]));
        q.weights.push_back(0.5 * w[i]);
    }
    return q;
}

namespace {

Vec reference_mean(const RemainderSpec& spec)
{
    if (const auto* g = std::get_if<GaussianMeasure>(&spec.reference)) return g->mean;
    return mean(std::get<EmpiricalMeasure>(spec.reference));
}

EmpiricalMeasure reference_sample(const RemainderSpec& spec)
{
    if (const auto* e = std::get_if<EmpiricalMeasure>(&spec.reference)) {
        if (!e->uniform()) throw DomainError("eval_remainder: empirical reference must be uniform");
        return *e;
    }
    const auto& g = std::get<GaussianMeasure>(spec.reference);
    if (spec.mc_samples < 1000) throw PreconditionError("eval_remainder: mc_samples must be at least 1000");
    const int d = g.dim();
    std::vector<double> coords(spec.mc_samples * static_cast<std::size_t>(d));
    KeyedNormal(spec.seed, 0, Stream::reference).fill(0, coords);
    const Mat root = psd_sqrt(g.cov);
    for (std::size_t i = 0; i < spec.mc_samples; ++i) {
        VecMap x(coords.data() + i * d, d);
        x = g.mean + root * Vec(x);
    }
    return EmpiricalMeasure(std::move(coords), d);
}

double closed_form_remainder(const RemainderSpec& spec, const EmpiricalMeasure& nu)
{
    const auto& form = *spec.drift.mean_affine;
    const Vec m_nu = mean(nu), m_mu = reference_mean(spec);
    const Vec delta = m_nu - m_mu;
    double total = 0.0;
    for (std::size_t q = 0; q < spec.s_rule.nodes.size(); ++q) {
        const double s = spec.s_rule.nodes[q];
        const auto hess = form.d2F(s * m_nu + (1.0 - s) * m_mu);
        double sq = 0.0;
        for (const auto& h : hess) {
            const double v = delta.dot(h * delta);
            sq += v * v;
        }
        total += spec.s_rule.weights[q] * sq;
    }
    return total;
}

double sampled_remainder(const RemainderSpec& spec, const EmpiricalMeasure& nu)
{
    const auto mu = reference_sample(spec);
    const std::size_t n = nu.size(), M = mu.size();
    std::vector<Vec> ys(n), us(M);
    for (std::size_t i = 0; i < n; ++i) ys[i] = nu.point(i);
    for (std::size_t j = 0; j < M; ++j) us[j] = mu.point(j);
    const double inv_m = 1.0 / static_cast<double>(M);
    const std::size_t pairs = M / 2;

    double total = 0.0;
    for (std::size_t q = 0; q < spec.s_rule.nodes.size(); ++q) {
        const double s = spec.s_rule.nodes[q];
        const auto mix = mixture(nu.view(), mu.view(), 1.0 - s);
        const auto f2 = spec.drift.flat2(mix.view());
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const Vec& x = ys[a];
            Vec inner = Vec::Zero(x.size());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) inner += nu.weight(i) * nu.weight(j) * f2(x, ys[i], ys[j]);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < M; ++j)
                    inner -= nu.weight(i) * inv_m * (f2(x, ys[i], us[j]) + f2(x, us[j], ys[i]));
            Vec cross = Vec::Zero(x.size());
            for (std::size_t p = 0; p < pairs; ++p) cross += f2(x, us[2 * p], us[2 * p + 1]);
            inner += cross / static_cast<double>(pairs);
            acc += nu.weight(a) * inner.squaredNorm();
        }
        total += spec.s_rule.weights[q] * acc;
    }
    return total;
}

struct Summary {
    double mean = 0.0, standard_error = 0.0;
};

Summary summarize(const std::vector<double>& v)
{
    const double R = static_cast<double>(v.size());
    Summary s;
    for (double x : v) s.mean += x;
    s.mean /= R;
    double var = 0.0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    s.standard_error = v.size() > 1 ? std::sqrt(var / (R - 1.0) / R) : 0.0;
    return s;
}

SimConfig terminal_only(const SimConfig& cfg, std::size_t n)
{
    SimConfig c = cfg;
    c.n = n;
    c.record_stride = std::max<std::size_t>(1, c.steps());
    return c;
}

// E f(N(m, s)) in d = 1.
double gaussian_expectation(const std::function<double(const Vec&)>& f, double m, double var)
{
    const double sd = std::sqrt(std::max(0.0, var));
    if (sd == 0.0) return f(Vec::Constant(1, m));
    auto integrand = [&](double z) {
        return f(Vec::Constant(1, m + sd * z)) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -12.0, 12.0, 15, 1e-14);
}

}  // namespace

double eval_remainder(const RemainderSpec& spec, const EmpiricalMeasure& nu)
{
    spec.drift.require(false, true, false, false);
    if (spec.s_rule.nodes.size() != spec.s_rule.weights.size() || spec.s_rule.nodes.empty())
        throw DomainError("eval_remainder: malformed s quadrature");
    for (double s : spec.s_rule.nodes)
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("eval_remainder: s nodes must lie in [0, 1]");
    const int ref_dim = std::holds_alternative<GaussianMeasure>(spec.reference)
                            ? std::get<GaussianMeasure>(spec.reference).dim()
                            : std::get<EmpiricalMeasure>(spec.reference).dim();
    if (nu.dim() != ref_dim || nu.dim() != spec.drift.dim)
        throw UnsupportedDimension("eval_remainder: dimension mismatch");
    if (spec.closed_form && spec.drift.mean_affine) return closed_form_remainder(spec, nu);
    return sampled_remainder(spec, nu);
}

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows, const std::string& value_name)
{
    CsvWriter w(os, {"n", value_name, "stderr"});
    for (const auto& r : rows) w.row({fmt(r.n), fmt(r.value), fmt(r.standard_error)});
}

std::vector<ScalingRow> remainder_scaling(const RemainderSpec& spec, const DriftModel& V_dynamics,
                                          const SimConfig& cfg, const std::vector<std::size_t>& n_grid,
                                          std::size_t replicas, std::size_t workers)
{
    spec.drift.require(false, true, false, false);
    if (replicas < 1) throw DomainError("remainder_scaling needs at least one replica");
    std::vector<ScalingRow> rows;
    for (std::size_t n : n_grid) {
        const SimConfig c = terminal_only(cfg, n);
        std::vector<double> values(replicas);
        parallel_for(replicas, workers, [&](std::size_t r) {
            const auto traj = run_particles(V_dynamics, c, r);
            values[r] = eval_remainder(spec, EmpiricalMeasure(traj.final_state(), c.d));
        });
        const auto s = summarize(values);
        rows.push_back({n, s.mean, s.standard_error});
    }
    return rows;
}

WeakFunctional WeakFunctional::mean_value()
{
    WeakFunctional phi;
    phi.eval = [](const MeasureView& nu) { return mean(nu)[0]; };
    phi.mean_form = [](const Vec& m) { return m[0]; };
    return phi;
}

WeakFunctional WeakFunctional::centered_quartic(double reference)
{
    WeakFunctional phi;
    phi.tag = VanishingOrder::second_order_vanishing;
    phi.eval = [reference](const MeasureView& nu) { return std::pow(mean(nu)[0] - reference, 4); };
    phi.mean_form = [reference](const Vec& m) { return std::pow(m[0] - reference, 4); };
    return phi;
}

WeakFunctional WeakFunctional::constant(double c)
{
    WeakFunctional phi;
    phi.tag = VanishingOrder::second_order_vanishing;
    phi.eval = [c](const MeasureView&) { return c; };
    phi.mean_form = [c](const Vec&) { return c; };
    return phi;
}

GaussianMeasure mean_affine_limit(const DriftModel& V, const SimConfig& cfg)
{
    cfg.validate();
    if (!V.mean_affine) throw CapabilityError("drift model '" + V.name + "' is not mean-affine");
    if (!cfg.init.gaussian) throw PreconditionError("mean_affine_limit needs a Gaussian initial law");
    const std::size_t steps = cfg.steps();
    const auto means = euler_mean_path(V, cfg.init.gaussian->mean, cfg.dt, steps);
    const Mat G = Mat::Identity(cfg.d, cfg.d) + cfg.dt * V.mean_affine->A;
    const Mat noise = 2.0 * cfg.dt * cfg.sigma * cfg.sigma * Mat::Identity(cfg.d, cfg.d);
    Mat S = cfg.init.gaussian->cov;
    for (std::size_t k = 0; k < steps; ++k) S = G * S * G.transpose() + noise;
    return {means.back(), 0.5 * (S + S.transpose())};
}

std::vector<std::vector<ScalingRow>> weak_chaos_gaps(const std::vector<WeakFunctional>& phis,
                                                     const DriftModel& V, const SimConfig& cfg,
                                                     const std::vector<std::size_t>& n_grid,
                                                     std::size_t replicas,
                                                     const std::vector<double>& oracle_values,
                                                     std::size_t workers)
{
    cfg.validate();
    if (replicas < 1) throw DomainError("weak_chaos_gap needs at least one replica");
    if (phis.size() != oracle_values.size()) throw DomainError("weak_chaos_gap: one oracle value per functional");
    bool control = V.mean_affine && cfg.d == 1 && cfg.init.gaussian;
    for (const auto& phi : phis) {
        if (!phi.eval) throw CapabilityError("weak functional has no eval");
        control = control && phi.mean_form;
    }
    const std::size_t steps = cfg.steps();
    const std::size_t J = phis.size();
    const std::vector<Vec> path =
        control ? euler_mean_path(V, cfg.init.gaussian->mean, cfg.dt, steps) : std::vector<Vec>{};

    std::vector<std::vector<ScalingRow>> tables(J);
    for (std::size_t n : n_grid) {
        const SimConfig c = terminal_only(cfg, n);
        std::vector<std::vector<double>> values(J, std::vector<double>(replicas));
        if (!control) {
            parallel_for(replicas, workers, [&](std::size_t r) {
                const auto traj = run_particles(V, c, r);
                const auto last = traj.at(traj.states.size() - 1);
                for (std::size_t j = 0; j < J; ++j) values[j][r] = phis[j].eval(last);
            });
            for (std::size_t j = 0; j < J; ++j) {
                const auto s = summarize(values[j]);
                tables[j].push_back({n, std::abs(s.mean - oracle_values[j]), s.standard_error});
            }
            continue;
        }

        const auto& form = *V.mean_affine;
        const double a = form.A(0, 0), dt = c.dt, scale = std::sqrt(2.0 * dt) * c.sigma;
        std::vector<double> slope(steps), offset(steps);
        double var = c.init.gaussian->cov(0, 0) / static_cast<double>(n);
        for (std::size_t k = 0; k < steps; ++k) {
            slope[k] = form.dF(path[k])(0, 0);
            offset[k] = form.F(path[k])[0] - slope[k] * path[k][0];
            const double g = 1.0 + dt * (a + slope[k]);
            var = g * g * var + 2.0 * dt * c.sigma * c.sigma / static_cast<double>(n);
        }
        parallel_for(replicas, workers, [&](std::size_t r) {
            const KeyedNormal rng(c.seed, r, Stream::dynamics);
            std::vector<double> y = sample_initial(c, r), z = y, drift(n), noise(n);
            for (std::size_t k = 0; k < steps; ++k) {
                V.eval(MeasureView{y, {}, 1}, y, drift);
                double mz = 0.0;
                for (double v : z) mz += v;
                mz /= static_cast<double>(n);
                // F(m_k) + F'(m_k) (mz - m_k)
                const double lin = offset[k] + slope[k] * mz;
                rng.fill(k, noise);
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] += drift[i] * dt + scale * noise[i];
                    z[i] += (a * z[i] + lin) * dt + scale * noise[i];
                }
            }
            double my = 0.0, mz = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                my += y[i];
                mz += z[i];
            }
            const Vec vy = Vec::Constant(1, my / static_cast<double>(n));
            const Vec vz = Vec::Constant(1, mz / static_cast<double>(n));
            for (std::size_t j = 0; j < J; ++j) values[j][r] = (*phis[j].mean_form)(vy) - (*phis[j].mean_form)(vz);
        });
        for (std::size_t j = 0; j < J; ++j) {
            const auto s = summarize(values[j]);
            const double exact = gaussian_expectation(*phis[j].mean_form, path[steps][0], var);
            tables[j].push_back({n, std::abs(s.mean + exact - oracle_values[j]), s.standard_error});
        }
    }
    return tables;
}

std::vector<ScalingRow> weak_chaos_gap(const WeakFunctional& phi, const DriftModel& V, const SimConfig& cfg,
                                       const std::vector<std::size_t>& n_grid, std::size_t replicas,
                                       double oracle_value, std::size_t workers)
{
    return weak_chaos_gaps({phi}, V, cfg, n_grid, replicas, {oracle_value}, workers).front();
}

std::vector<ScalingRow> quantization_demo(int d, const std::vector<std::size_t>& n_grid, std::size_t replicas,
                                          std::uint64_t seed, double regularization, std::size_t workers)
{
    if (d != 3) throw UnsupportedDimension("quantization_demo is defined for d = 3");
    if (replicas < 1) throw DomainError("quantization_demo needs at least one replica");
    SinkhornOptions opts;
    opts.cost_power = 1;
    std::vector<ScalingRow> rows;
    for (std::size_t n : n_grid) {
        std::vector<double> values(replicas);
        parallel_for(replicas, workers, [&](std::size_t r) {
            std::vector<double> pts(n * d), ref(10 * n * d);
            KeyedNormal(seed, r, Stream::sampler).fill(n, pts);
            KeyedNormal(seed, r, Stream::reference).fill(n, ref);
            values[r] = sinkhorn_divergence(MeasureView{pts, {}, d}, MeasureView{ref, {}, d}, regularization, opts)
                            .distance;
        });
        const auto s = summarize(values);
        rows.push_back({n, s.mean, s.standard_error});
    }
    return rows;
}

}  // namespace chaoslab
