#include "chaoslab/simulate.hpp"

#include <cmath>
#include <ostream>

#include "chaoslab/csv.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

InitialLaw InitialLaw::normal(Vec mean, Mat cov)
{
    InitialLaw law;
    law.gaussian = GaussianMeasure{std::move(mean), std::move(cov)};
    law.gaussian->validate();
    return law;
}

InitialLaw InitialLaw::scalar_normal(double mean, double variance)
{
    return normal(Vec::Constant(1, mean), Mat::Constant(1, 1, variance));
}

InitialLaw InitialLaw::explicit_points(std::vector<double> coords)
{
    InitialLaw law;
    law.points = std::move(coords);
    return law;
}

void SimConfig::validate() const
{
    if (n < 1) throw DomainError("SimConfig: n must be at least 1");
    if (d < 1) throw UnsupportedDimension("SimConfig: d must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("SimConfig: sigma must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("SimConfig: dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("SimConfig: t_end must be >= 0");
    if (record_stride < 1) throw DomainError("SimConfig: record_stride must be at least 1");
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio))
        throw DomainError("SimConfig: t_end must be a whole number of steps");
    if (init.gaussian) {
        if (init.gaussian->dim() != d) throw UnsupportedDimension("SimConfig: initial law dimension");
    } else if (init.points.size() != n * static_cast<std::size_t>(d)) {
        throw DomainError("SimConfig: explicit initial points must hold n*d values");
    }
}

std::size_t SimConfig::steps() const
{
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

std::vector<double> sample_initial(const SimConfig& cfg, std::uint64_t replica, Stream stream)
{
    const std::size_t nd = cfg.n * static_cast<std::size_t>(cfg.d);
    if (!cfg.init.gaussian) return cfg.init.points;
    const auto& g = *cfg.init.gaussian;
    std::vector<double> out(nd);
    KeyedNormal(cfg.seed, replica, stream).fill(0, out);
    if (cfg.d == 1) {
        const double m = g.mean[0], s = std::sqrt(std::max(0.0, g.cov(0, 0)));
        for (double& v : out) v = m + s * v;
        return out;
    }
    const Mat root = psd_sqrt(g.cov);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        VecMap x(out.data() + i * cfg.d, cfg.d);
        x = g.mean + root * Vec(x);
    }
    return out;
}

void Trajectory::write_csv(std::ostream& os) const
{
    std::vector<std::string> header{"t", "particle"};
    for (int j = 0; j < d; ++j) header.push_back("dim" + std::to_string(j));
    CsvWriter w(os, header);
    for (std::size_t s = 0; s < states.size(); ++s)
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> row{fmt(times[s]), fmt(i)};
            for (int j = 0; j < d; ++j) row.push_back(fmt(states[s][i * d + j]));
            w.row(row);
        }
}

namespace {

constexpr double kDivergenceBox = 1e8;

void guard(const std::vector<double>& state, std::size_t step)
{
    for (double v : state)
        if (!(std::abs(v) <= kDivergenceBox))
            throw DivergenceError("particle state diverged at step " + std::to_string(step), step);
}

Trajectory integrate(const DriftModel& V, const SimConfig& cfg, std::uint64_t replica,
                     Stream init_stream, Stream noise_stream)
{
    cfg.validate();
    if (!V.eval) throw CapabilityError("drift model '" + V.name + "' cannot be evaluated");
    if (V.dim != cfg.d) throw UnsupportedDimension("drift and configuration dimensions differ");

    const std::size_t steps = cfg.steps();
    const KeyedNormal rng(cfg.seed, replica, noise_stream);
    const double scale = std::sqrt(2.0 * cfg.dt) * cfg.sigma;

    Trajectory traj;
    traj.n = cfg.n;
    traj.d = cfg.d;
    traj.dt = cfg.dt;
    std::vector<double> state = sample_initial(cfg, replica, init_stream);
    std::vector<double> drift(state.size()), noise(state.size());
    traj.times.push_back(0.0);
    traj.steps.push_back(0);
    traj.states.push_back(state);

    for (std::size_t k = 0; k < steps; ++k) {
        V.eval(MeasureView{state, {}, cfg.d}, state, drift);
        if (scale > 0.0) {
            rng.fill(k, noise);
            for (std::size_t i = 0; i < state.size(); ++i)
                state[i] += drift[i] * cfg.dt + scale * noise[i];
        } else {
            for (std::size_t i = 0; i < state.size(); ++i) state[i] += drift[i] * cfg.dt;
        }
        guard(state, k + 1);
        if ((k + 1) % cfg.record_stride == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * cfg.dt);
            traj.steps.push_back(k + 1);
            traj.states.push_back(state);
        }
    }
    return traj;
}

}  // namespace

Trajectory run_particles(const DriftModel& V, const SimConfig& cfg, std::uint64_t replica)
{
    return integrate(V, cfg, replica, Stream::initial, Stream::dynamics);
}

Trajectory run_mckean_reference(const DriftModel& V, const SimConfig& cfg, std::size_t n_ref)
{
    SimConfig big = cfg;
    big.n = n_ref;
    if (!cfg.init.gaussian)
        throw PreconditionError("run_mckean_reference needs a Gaussian initial law to draw n_ref points");
    return integrate(V, big, 0, Stream::auxiliary, Stream::reference);
}

ReferenceFlow ReferenceFlow::from_trajectory(Trajectory traj)
{
    for (std::size_t i = 0; i < traj.steps.size(); ++i)
        if (traj.steps[i] != i)
            throw PreconditionError("reference flow needs a trajectory recorded at every step");
    ReferenceFlow flow;
    flow.traj_ = std::move(traj);
    return flow;
}

ReferenceFlow ReferenceFlow::mean_path(std::vector<Vec> means, double dt)
{
    if (means.empty()) throw InsufficientData("mean path is empty");
    ReferenceFlow flow;
    flow.atomic_mean_ = true;
    flow.traj_.n = 1;
    flow.traj_.d = static_cast<int>(means.front().size());
    flow.traj_.dt = dt;
    for (std::size_t k = 0; k < means.size(); ++k) {
        flow.traj_.times.push_back(static_cast<double>(k) * dt);
        flow.traj_.steps.push_back(k);
        flow.traj_.states.emplace_back(means[k].data(), means[k].data() + means[k].size());
    }
    return flow;
}

std::vector<Vec> euler_mean_path(const DriftModel& V, const Vec& m0, double dt, std::size_t steps)
{
    if (!V.mean_affine) throw CapabilityError("drift model '" + V.name + "' is not mean-affine");
    const auto& f = *V.mean_affine;
    std::vector<Vec> path{m0};
    path.reserve(steps + 1);
    for (std::size_t k = 0; k < steps; ++k) {
        const Vec& m = path.back();
        path.push_back(m + dt * (f.A * m + f.F(m)));
    }
    return path;
}

CouplingReport run_synchronous_coupling(const DriftModel& V, const SimConfig& cfg,
                                        const ReferenceFlow& mu_flow, std::size_t replicas,
                                        std::size_t workers)
{
    cfg.validate();
    if (replicas < 1) throw DomainError("coupling needs at least one replica");
    if (V.dim != cfg.d || mu_flow.dim() != cfg.d)
        throw UnsupportedDimension("coupling: dimension mismatch");
    const std::size_t steps = cfg.steps();
    if (mu_flow.steps() < steps || std::abs(mu_flow.dt() - cfg.dt) > 1e-12 * cfg.dt)
        throw PreconditionError("reference flow does not cover the simulation grid");
    if (mu_flow.atomic_mean() && V.structure != Structure::mean_affine)
        throw PreconditionError("a mean path can only drive a mean-affine drift");

    const std::size_t nd = cfg.n * static_cast<std::size_t>(cfg.d);
    const double scale = std::sqrt(2.0 * cfg.dt) * cfg.sigma;
    std::vector<std::size_t> recorded;
    for (std::size_t k = 0; k <= steps; ++k)
        if (k % cfg.record_stride == 0 || k == steps) recorded.push_back(k);

    std::vector<double> sup_gap(replicas);
    std::vector<std::vector<double>> gaps(replicas, std::vector<double>(recorded.size()));
    parallel_for(replicas, workers, [&](std::size_t r) {
        const KeyedNormal rng(cfg.seed, r, Stream::dynamics);
        std::vector<double> y = sample_initial(cfg, r), x = y;
        std::vector<double> vy(nd), vx(nd), noise(nd), sup(cfg.n, 0.0);
        std::size_t slot = 1;
        gaps[r][0] = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            V.eval(MeasureView{y, {}, cfg.d}, y, vy);
            V.eval(mu_flow.at_step(k), x, vx);
            if (scale > 0.0) rng.fill(k, noise);
            for (std::size_t i = 0; i < nd; ++i) {
                const double w = scale > 0.0 ? scale * noise[i] : 0.0;
                y[i] += vy[i] * cfg.dt + w;
                x[i] += vx[i] * cfg.dt + w;
            }
            guard(y, k + 1);
            guard(x, k + 1);
            double total = 0.0;
            for (std::size_t i = 0; i < cfg.n; ++i) {
                double g = 0.0;
                for (int j = 0; j < cfg.d; ++j) {
                    const double diff = y[i * cfg.d + j] - x[i * cfg.d + j];
                    g += diff * diff;
                }
                sup[i] = std::max(sup[i], g);
                total += g;
            }
            if (slot < recorded.size() && recorded[slot] == k + 1)
                gaps[r][slot++] = total / static_cast<double>(cfg.n);
        }
        double s = 0.0;
        for (double v : sup) s += v;
        sup_gap[r] = s / static_cast<double>(cfg.n);
    });

    CouplingReport rep;
    rep.replicas = replicas;
    const double R = static_cast<double>(replicas);
    double m = 0.0;
    for (double v : sup_gap) m += v;
    m /= R;
    double var = 0.0;
    for (double v : sup_gap) var += (v - m) * (v - m);
    rep.sup_gap_sq_per_particle = m;
    rep.standard_error = replicas > 1 ? std::sqrt(var / (R - 1.0) / R) : 0.0;
    for (std::size_t s = 0; s < recorded.size(); ++s) {
        double g = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) g += gaps[r][s];
        rep.times.push_back(static_cast<double>(recorded[s]) * cfg.dt);
        rep.per_time_gaps.push_back(g / R);
    }
    return rep;
}

}  // namespace chaoslab
