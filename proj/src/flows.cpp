#include "chaoslab/flows.hpp"

#include <cmath>
#include <ostream>

#include "chaoslab/csv.hpp"

namespace chaoslab {

namespace {

void require_cover(const ReferenceFlow& flow, const SimConfig& cfg)
{
    if (flow.steps() < cfg.steps() || std::abs(flow.dt() - cfg.dt) > 1e-12 * cfg.dt)
        throw PreconditionError("reference flow does not cover the simulation grid");
    if (flow.dim() != cfg.d) throw UnsupportedDimension("reference flow dimension differs");
}

bool keep(std::size_t step, std::size_t steps, std::size_t stride)
{
    return step % stride == 0 || step == steps;
}

double spectral_norm(const Mat& m)
{
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace

TangentFlow simulate_tangent(const DriftModel& V, const SimConfig& cfg, const ReferenceFlow& mu_flow,
                             const Vec& x0, std::uint64_t replica)
{
    cfg.validate();
    V.require(false, false, false, true);
    require_cover(mu_flow, cfg);
    if (x0.size() != cfg.d || V.dim != cfg.d) throw UnsupportedDimension("simulate_tangent: dimension mismatch");

    const int d = cfg.d;
    const std::size_t steps = cfg.steps();
    const KeyedNormal rng(cfg.seed, replica, Stream::dynamics);
    const double scale = std::sqrt(2.0 * cfg.dt) * cfg.sigma;

    TangentFlow out;
    Vec x = x0, v(d);
    Mat J = Mat::Identity(d, d);
    out.times.push_back(0.0);
    out.base_path.push_back(x);
    out.jacobian.push_back(J);
    for (std::size_t k = 0; k < steps; ++k) {
        const MeasureView mu = mu_flow.at_step(k);
        V.eval(mu, std::span<const double>(x.data(), d), std::span<double>(v.data(), d));
        J += cfg.dt * (V.xgrad(mu)(x) * J);
        x += cfg.dt * v;
        if (scale > 0.0)
            for (int j = 0; j < d; ++j) x[j] += scale * rng.normal(k, static_cast<std::uint64_t>(j));
        if (!(x.cwiseAbs().maxCoeff() <= 1e8)) throw DivergenceError("tangent path diverged", k + 1);
        if (keep(k + 1, steps, cfg.record_stride)) {
            out.times.push_back(static_cast<double>(k + 1) * cfg.dt);
            out.base_path.push_back(x);
            out.jacobian.push_back(J);
        }
    }
    return out;
}

LionsFlow simulate_lions(const DriftModel& V, const SimConfig& cfg, const Vec& x0, const Vec& y, std::size_t M)
{
    cfg.validate();
    V.require(false, false, true, true);
    if (M < 100) throw PreconditionError("simulate_lions needs an ensemble of at least 100 copies");
    if (x0.size() != cfg.d || y.size() != cfg.d || V.dim != cfg.d)
        throw UnsupportedDimension("simulate_lions: dimension mismatch");
    if (!cfg.init.gaussian) throw PreconditionError("simulate_lions needs a Gaussian initial law");

    const int d = cfg.d;
    const std::size_t md = M * static_cast<std::size_t>(d);
    const std::size_t steps = cfg.steps();
    const double dt = cfg.dt, scale = std::sqrt(2.0 * dt) * cfg.sigma;
    SimConfig ens = cfg;
    ens.n = M;
    const KeyedNormal noise_x(cfg.seed, 0, Stream::ensemble), noise_y(cfg.seed, 1, Stream::ensemble),
        noise_0(cfg.seed, 2, Stream::ensemble);

    // With a mean-affine drift, xgrad = A and wgrad = dF(mean) for every
    // argument, so all law-level flows coincide with one deterministic-given-
    // the-mean matrix Z, the tangents J^y with e^{At}, and xi with Z.
    const bool affine = V.structure == Structure::mean_affine && V.mean_affine.has_value();

    std::vector<double> X = sample_initial(ens, 0), vX(md);
    std::vector<double> Xy, vXy;
    std::vector<Mat> Jy, Z;
    if (!affine) {
        Xy.assign(md, 0.0);
        for (std::size_t i = 0; i < M; ++i)
            for (int j = 0; j < d; ++j) Xy[i * d + j] = y[j];
        vXy.resize(md);
        Jy.assign(M, Mat::Identity(d, d));
        Z.assign(M, Mat::Zero(d, d));
    }
    Vec xp = x0, vp(d);
    Mat xi = Mat::Zero(d, d), zeta = Mat::Zero(d, d), jac = Mat::Identity(d, d);

    LionsFlow out;
    out.ensemble_size = M;
    out.y = y;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.xi_point.push_back(xi);
        if (affine) {
            out.xi_law_mean.push_back(zeta);
            out.xi_law_ms.push_back(zeta.squaredNorm());
        } else {
            Mat m = Mat::Zero(d, d);
            double ms = 0.0;
            for (const auto& z : Z) {
                m += z;
                ms += z.squaredNorm();
            }
            out.xi_law_mean.push_back(m / static_cast<double>(M));
            out.xi_law_ms.push_back(ms / static_cast<double>(M));
        }
    };
    record(0.0);

    std::vector<double> buf(md);
    auto diffuse = [&](std::vector<double>& state, const std::vector<double>& drift, const KeyedNormal& rng,
                       std::size_t k) {
        if (scale > 0.0) {
            rng.fill(k, buf);
            for (std::size_t i = 0; i < state.size(); ++i) state[i] += drift[i] * dt + scale * buf[i];
        } else {
            for (std::size_t i = 0; i < state.size(); ++i) state[i] += drift[i] * dt;
        }
    };

    for (std::size_t k = 0; k < steps; ++k) {
        const MeasureView mu{X, {}, d};
        V.eval(mu, X, vX);
        V.eval(mu, std::span<const double>(xp.data(), d), std::span<double>(vp.data(), d));
        const auto xg = V.xgrad(mu);
        const auto wg = V.wgrad(mu);
        if (affine) {
            const Mat A = xg(xp);
            const Mat W = wg(xp, xp);
            const Mat drive = W * (jac + zeta);
            zeta += dt * (A * zeta + drive);
            jac += dt * (A * jac);
            xi = zeta;
        } else {
            V.eval(mu, Xy, vXy);
            std::vector<Mat> Zn(M);
            auto law_term = [&](const Vec& x) {
                Mat acc = Mat::Zero(d, d);
                for (std::size_t j = 0; j < M; ++j) {
                    acc += wg(x, ConstVecMap(Xy.data() + j * d, d)) * Jy[j];
                    acc += wg(x, ConstVecMap(X.data() + j * d, d)) * Z[j];
                }
                return Mat(acc / static_cast<double>(M));
            };
            for (std::size_t i = 0; i < M; ++i) {
                const Vec xi_pos = ConstVecMap(X.data() + i * d, d);
                Zn[i] = Z[i] + dt * (xg(xi_pos) * Z[i] + law_term(xi_pos));
            }
            xi += dt * (xg(xp) * xi + law_term(xp));
            for (std::size_t j = 0; j < M; ++j)
                Jy[j] += dt * (xg(ConstVecMap(Xy.data() + j * d, d)) * Jy[j]);
            Z = std::move(Zn);
            diffuse(Xy, vXy, noise_y, k);
        }
        diffuse(X, vX, noise_x, k);
        xp += dt * vp;
        if (scale > 0.0)
            for (int j = 0; j < d; ++j) xp[j] += scale * noise_0.normal(k, static_cast<std::uint64_t>(j));
        for (double v : X)
            if (!(std::abs(v) <= 1e8)) throw DivergenceError("Lions ensemble diverged", k + 1);
        if (keep(k + 1, steps, cfg.record_stride)) record(static_cast<double>(k + 1) * dt);
    }
    return out;
}

DecayReport check_decay(const DriftModel& V, double lambda, double horizon,
                        const std::variant<TangentFlow, LionsFlow>& flow)
{
    const auto qf = check_quadratic_form(V, gaussian_pair_sampler(V.dim, 11), lambda, 4000);
    if (!qf.pass)
        throw PreconditionError("drift '" + V.name + "' fails the quadratic-form monotonicity check at lambda");

    DecayReport rep;
    if (const auto* tf = std::get_if<TangentFlow>(&flow)) {
        if (tf->times.empty() || tf->times.back() < horizon * (1.0 - 1e-12))
            throw PreconditionError("tangent flow does not reach the horizon");
        for (std::size_t i = 0; i < tf->times.size(); ++i) {
            if (tf->times[i] > horizon * (1.0 + 1e-12)) break;
            const double norm = spectral_norm(tf->jacobian[i]);
            rep.peak = std::max(rep.peak, norm);
            rep.tail = norm;
            rep.contraction = std::max(rep.contraction, norm * std::exp(lambda * tf->times[i]));
        }
        rep.ratio = rep.peak > 0.0 ? rep.tail / rep.peak : 0.0;
        rep.pass = rep.contraction <= 1.0 + 1e-6;
        return rep;
    }
    const auto& lf = std::get<LionsFlow>(flow);
    if (lf.times.empty() || lf.times.back() < horizon * (1.0 - 1e-12))
        throw PreconditionError("Lions flow does not reach the horizon");
    for (std::size_t i = 0; i < lf.times.size(); ++i) {
        if (lf.times[i] > horizon * (1.0 + 1e-12)) break;
        const double rms = std::sqrt(lf.xi_law_ms[i]);
        rep.peak = std::max(rep.peak, rms);
        rep.tail = rms;
    }
    rep.ratio = rep.peak > 0.0 ? rep.tail / rep.peak : 0.0;
    rep.pass = rep.ratio <= 0.05;
    return rep;
}

void write_decay_csv(std::ostream& os, const TangentFlow& tangent, const LionsFlow& lions)
{
    CsvWriter w(os, {"t", "quantity", "value"});
    for (std::size_t i = 0; i < tangent.times.size(); ++i)
        w.row({fmt(tangent.times[i]), "tangent_norm", fmt(spectral_norm(tangent.jacobian[i]))});
    for (std::size_t i = 0; i < lions.times.size(); ++i) {
        w.row({fmt(lions.times[i]), "lions_law_mean", fmt(lions.xi_law_mean[i](0, 0))});
        w.row({fmt(lions.times[i]), "lions_law_rms", fmt(std::sqrt(lions.xi_law_ms[i]))});
        w.row({fmt(lions.times[i]), "lions_point", fmt(lions.xi_point[i](0, 0))});
    }
}

}  // namespace chaoslab
