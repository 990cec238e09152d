#include "chaoslab/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace chaoslab {

void LinearGaussianModel::validate() const
{
    const auto d = A.rows();
    if (A.cols() != d || B.rows() != d || B.cols() != d || b0.size() != d)
        throw DomainError("LinearGaussianModel: inconsistent shapes");
    if (!A.allFinite() || !B.allFinite() || !b0.allFinite() || !std::isfinite(sigma) || sigma < 0.0)
        throw DomainError("LinearGaussianModel: parameters must be finite, sigma >= 0");
}

LinearGaussianModel LinearGaussianModel::from(const LinearMeanField& f, double sigma)
{
    LinearGaussianModel m{f.A, f.B, f.b0, sigma};
    m.validate();
    return m;
}

void GaussianState::validate() const
{
    const auto d = mean.size();
    if (n < 1) throw DomainError("GaussianState: n must be at least 1");
    if (var_block.rows() != d || var_block.cols() != d || cov_block.rows() != d || cov_block.cols() != d)
        throw DomainError("GaussianState: block shapes do not match the mean");
    auto psd = [](const Mat& m) {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    };
    if (!psd(var_block - cov_block) || !psd(var_block + static_cast<double>(n - 1) * cov_block))
        throw DomainError("GaussianState: implied covariance is not PSD");
}

GaussianState GaussianState::iid(std::size_t n, const GaussianMeasure& mu0)
{
    mu0.validate();
    return {n, mu0.mean, mu0.cov, Mat::Zero(mu0.dim(), mu0.dim())};
}

namespace {

std::size_t step_count(double t, double max_dt)
{
    if (!(t >= 0.0)) throw DomainError("evolution time must be >= 0");
    if (!(max_dt > 0.0)) throw DomainError("max_dt must be > 0");
    return static_cast<std::size_t>(std::ceil(t / max_dt - 1e-9));
}

// Classical RK4 on a tuple of matrices; `rhs` maps state to derivative.
template <class State, class Rhs>
State rk4(State s, double t, double max_dt, const Rhs& rhs)
{
    const std::size_t steps = step_count(t, max_dt);
    if (steps == 0) return s;
    const double h = t / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const State k1 = rhs(s);
        const State k2 = rhs(s.axpy(0.5 * h, k1));
        const State k3 = rhs(s.axpy(0.5 * h, k2));
        const State k4 = rhs(s.axpy(h, k3));
        s = s.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    }
    return s;
}

struct Triple {
    Vec m;
    Mat D, C;
    Triple axpy(double a, const Triple& x) const { return {m + a * x.m, D + a * x.D, C + a * x.C}; }
};

struct Pair {
    Vec m;
    Mat S;
    Pair axpy(double a, const Pair& x) const { return {m + a * x.m, S + a * x.S}; }
};

Mat whitener(const Mat& cov)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    const Vec ev = es.eigenvalues();
    if (ev.minCoeff() <= 1e-14 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
        throw SingularCovariance("limit covariance is singular");
    return es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double kernel_sum(const Mat& whitened)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (whitened + whitened.transpose()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += kl_kernel(es.eigenvalues()[i] - 1.0);
    return s;
}

}  // namespace

GaussianState evolve_particle_law(const LinearGaussianModel& model, const GaussianState& init, double t,
                                  double max_dt)
{
    model.validate();
    init.validate();
    if (init.dim() != model.dim()) throw UnsupportedDimension("particle law and model dimensions differ");
    const Mat& A = model.A;
    const Mat AB = model.A + model.B;
    const Mat noise = 2.0 * model.sigma * model.sigma * Mat::Identity(model.dim(), model.dim());
    const double inv_n = 1.0 / static_cast<double>(init.n);
    Triple s{init.mean, init.var_block - init.cov_block, init.cov_block};
    s = rk4(s, t, max_dt, [&](const Triple& x) {
        const Mat BD = model.B * x.D;
        return Triple{AB * x.m + model.b0, A * x.D + x.D * A.transpose() + noise,
                      AB * x.C + x.C * AB.transpose() + inv_n * (BD + BD.transpose())};
    });
    return {init.n, s.m, s.D + s.C, s.C};
}

LimitState evolve_limit_law(const LinearGaussianModel& model, const LimitState& init, double t, double max_dt)
{
    model.validate();
    if (init.mean.size() != model.dim() || init.cov.rows() != model.dim())
        throw UnsupportedDimension("limit law and model dimensions differ");
    const Mat& A = model.A;
    const Mat AB = model.A + model.B;
    const Mat noise = 2.0 * model.sigma * model.sigma * Mat::Identity(model.dim(), model.dim());
    Pair s{init.mean, init.cov};
    s = rk4(s, t, max_dt, [&](const Pair& x) {
        return Pair{AB * x.m + model.b0, A * x.S + x.S * A.transpose() + noise};
    });
    return {s.m, s.S};
}

GaussianMeasure k_marginal(const GaussianState& state, std::size_t k)
{
    if (k < 1 || k > state.n) throw DomainError("k_marginal: k must lie in [1, n]");
    const int d = state.dim();
    const auto kd = static_cast<Eigen::Index>(k) * d;
    GaussianMeasure g{Vec(kd), Mat(kd, kd)};
    for (std::size_t i = 0; i < k; ++i) {
        g.mean.segment(static_cast<Eigen::Index>(i) * d, d) = state.mean;
        for (std::size_t j = 0; j < k; ++j)
            g.cov.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) =
                i == j ? state.var_block : state.cov_block;
    }
    return g;
}

double marginal_entropy(const GaussianState& state, const LimitState& limit, std::size_t k)
{
    if (k < 1 || k > state.n) throw DomainError("marginal_entropy: k must lie in [1, n]");
    if (limit.mean.size() != state.dim()) throw UnsupportedDimension("marginal_entropy: dimension mismatch");
    const Mat W = whitener(limit.cov);
    const double kk = static_cast<double>(k);
    const Mat D = state.var_block - state.cov_block;
    const double shift = (W * (state.mean - limit.mean)).squaredNorm();
    double total = kk * shift + kernel_sum(W * (D + kk * state.cov_block) * W);
    if (k > 1) total += (kk - 1.0) * kernel_sum(W * D * W);
    return std::max(0.0, 0.5 * total);
}

double path_entropy_rate(const LinearGaussianModel& model, const GaussianState& state,
                         const LimitState& limit, std::size_t k)
{
    if (k < 1 || k > state.n) throw DomainError("path_entropy_rate: k must lie in [1, n]");
    if (!(model.sigma > 0.0)) throw DomainError("path_entropy_rate needs sigma > 0");
    const int d = state.dim();
    const double kk = static_cast<double>(k), n = static_cast<double>(state.n);
    const Mat D = state.var_block - state.cov_block;
    const Mat block = D + kk * state.cov_block;  // Cov of the k-sum is k * block
    Eigen::LDLT<Mat> solver(block);
    if (solver.info() != Eigen::Success || solver.rcond() < 1e-14)
        throw SingularCovariance("conditioning block is singular");
    // G = C block^{-1}; both symmetric, so G^T = block^{-1} C
    const Mat G = solver.solve(state.cov_block).transpose();
    const Mat H = Mat::Identity(d, d) + (n - kk) * G;
    const Mat BH = model.B * H;
    const Vec bias = model.B * (limit.mean - state.mean);
    const double spread = (BH * (kk * block) * BH.transpose()).trace() / (n * n);
    return kk / (4.0 * model.sigma * model.sigma) * (bias.squaredNorm() + spread);
}

std::vector<EntropyRow> entropy_profile(const LinearGaussianModel& model, std::size_t n,
                                        const std::vector<std::size_t>& k_grid,
                                        const GaussianMeasure& mu0, const std::vector<double>& t_grid,
                                        double panel)
{
    if (!(panel > 0.0)) throw DomainError("entropy_profile: panel must be > 0");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) || (!t_grid.empty() && t_grid.front() < 0.0))
        throw DomainError("entropy_profile: t_grid must be nondecreasing and >= 0");
    GaussianState particles = GaussianState::iid(n, mu0);
    LimitState limit{mu0.mean, mu0.cov};
    auto rates = [&](const GaussianState& p, const LimitState& l) {
        std::vector<double> r(k_grid.size());
        for (std::size_t i = 0; i < k_grid.size(); ++i) r[i] = path_entropy_rate(model, p, l, k_grid[i]);
        return r;
    };

    std::vector<double> path(k_grid.size(), 0.0);
    std::vector<double> rate_left = rates(particles, limit);
    std::vector<std::vector<EntropyRow>> by_k(k_grid.size());
    double now = 0.0;
    for (double target : t_grid) {
        const std::size_t panels = step_count(target - now, panel);
        const double w = panels ? (target - now) / static_cast<double>(panels) : 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            particles = evolve_particle_law(model, particles, 0.5 * w);
            limit = evolve_limit_law(model, limit, 0.5 * w);
            const auto mid = rates(particles, limit);
            particles = evolve_particle_law(model, particles, 0.5 * w);
            limit = evolve_limit_law(model, limit, 0.5 * w);
            const auto right = rates(particles, limit);
            for (std::size_t i = 0; i < k_grid.size(); ++i)
                path[i] += w / 6.0 * (rate_left[i] + 4.0 * mid[i] + right[i]);
            rate_left = right;
        }
        now = target;
        for (std::size_t i = 0; i < k_grid.size(); ++i)
            by_k[i].push_back({k_grid[i], target, marginal_entropy(particles, limit, k_grid[i]), path[i]});
    }
    std::vector<EntropyRow> rows;
    for (auto& v : by_k) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

}  // namespace chaoslab
