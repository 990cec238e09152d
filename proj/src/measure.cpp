#include "chaoslab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace chaoslab {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> coords, int dim)
    : coords_(std::move(coords)), dim_(dim)
{
    if (dim_ <= 0) throw DomainError("EmpiricalMeasure: dimension must be positive");
    if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim_) != 0)
        throw DomainError("EmpiricalMeasure: need at least one point of dimension d");
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> coords, std::vector<double> weights, int dim)
    : coords_(std::move(coords)), weights_(std::move(weights)), dim_(dim)
{
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<Vec>& points)
{
    if (points.empty()) throw DomainError("EmpiricalMeasure: no points");
    const auto d = points.front().size();
    std::vector<double> coords;
    coords.reserve(points.size() * static_cast<std::size_t>(d));
    for (const auto& p : points) {
        if (p.size() != d) throw DomainError("EmpiricalMeasure: inconsistent point dimension");
        coords.insert(coords.end(), p.data(), p.data() + d);
    }
    return EmpiricalMeasure(std::move(coords), static_cast<int>(d));
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(std::vector<double> values)
{
    return EmpiricalMeasure(std::move(values), 1);
}

EmpiricalMeasure EmpiricalMeasure::atom(const Vec& x)
{
    return EmpiricalMeasure(std::vector<double>(x.data(), x.data() + x.size()),
                            static_cast<int>(x.size()));
}

EmpiricalMeasure mixture(const MeasureView& nu, const MeasureView& eta, double h)
{
    if (nu.dim != eta.dim) throw UnsupportedDimension("mixture: dimension mismatch");
    if (!(h >= 0.0 && h <= 1.0)) throw DomainError("mixture: weight outside [0,1]");
    std::vector<double> coords(nu.coords.begin(), nu.coords.end());
    coords.insert(coords.end(), eta.coords.begin(), eta.coords.end());
    std::vector<double> weights;
    weights.reserve(nu.size() + eta.size());
    for (std::size_t i = 0; i < nu.size(); ++i) weights.push_back((1.0 - h) * nu.weight(i));
    for (std::size_t i = 0; i < eta.size(); ++i) weights.push_back(h * eta.weight(i));
    return EmpiricalMeasure(std::move(coords), std::move(weights), nu.dim);
}

void GaussianMeasure::validate() const
{
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw DomainError("GaussianMeasure: covariance shape does not match mean");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("GaussianMeasure: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw DomainError("GaussianMeasure: covariance not positive semidefinite");
}

Vec mean(const MeasureView& mu)
{
    Vec m = Vec::Zero(mu.dim);
    const std::size_t n = mu.size();
    if (mu.weights.empty()) {
        for (std::size_t i = 0; i < n; ++i) m += mu.point(i);
        m /= static_cast<double>(n);
    } else {
        for (std::size_t i = 0; i < n; ++i) m += mu.weights[i] * mu.point(i);
    }
    return m;
}

double w1_1d(const MeasureView& mu, const MeasureView& nu)
{
    if (mu.dim != 1 || nu.dim != 1) throw UnsupportedDimension("w1_1d: requires d = 1");
    auto sorted_atoms = [](const MeasureView& m) {
        std::vector<std::pair<double, double>> atoms(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) atoms[i] = {m.coords[i], m.weight(i)};
        std::sort(atoms.begin(), atoms.end());
        return atoms;
    };
    if (mu.weights.empty() && nu.weights.empty() && mu.size() == nu.size()) {
        std::vector<double> a(mu.coords.begin(), mu.coords.end());
        std::vector<double> b(nu.coords.begin(), nu.coords.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
        return total / static_cast<double>(a.size());
    }
    // Walk both quantile functions across the merged breakpoints.
    const auto a = sorted_atoms(mu);
    const auto b = sorted_atoms(nu);
    std::size_t i = 0, j = 0;
    double left_a = a[0].second, left_b = b[0].second, total = 0.0;
    while (i < a.size() && j < b.size()) {
        const double mass = std::min(left_a, left_b);
        total += mass * std::abs(a[i].first - b[j].first);
        left_a -= mass;
        left_b -= mass;
        if (left_a <= 1e-15 && ++i < a.size()) left_a += a[i].second;
        if (left_b <= 1e-15 && ++j < b.size()) left_b += b[j].second;
    }
    return total;
}

Mat psd_sqrt(const Mat& s)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    const Vec roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

double kl_kernel(double x)
{
    if (std::abs(x) < 1e-3) {
        // x^2/2 - x^3/3 + x^4/4 - ...
        double term = x * x, sum = 0.0;
        for (int k = 2; k < 12; ++k) {
            sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
            term *= x;
        }
        return sum;
    }
    return x - std::log1p(x);
}

double kl_gaussian(const GaussianMeasure& p, const GaussianMeasure& q)
{
    if (p.dim() != q.dim()) throw UnsupportedDimension("kl_gaussian: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Mat> qes(0.5 * (q.cov + q.cov.transpose()));
    const double qmax = std::max(qes.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (qes.eigenvalues().minCoeff() <= 1e-14 * qmax)
        throw SingularCovariance("kl_gaussian: reference covariance is singular");

    // Whiten by q: eigenvalues of S_q^{-1/2} (S_p - S_q) S_q^{-1/2} are lambda_i - 1.
    const Vec inv_root = qes.eigenvalues().cwiseSqrt().cwiseInverse();
    const Mat whiten = inv_root.asDiagonal() * qes.eigenvectors().transpose();
    const Mat excess = whiten * (p.cov - q.cov) * whiten.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> ees(0.5 * (excess + excess.transpose()),
                                           Eigen::EigenvaluesOnly);
    double total = 0.0;
    for (Eigen::Index i = 0; i < ees.eigenvalues().size(); ++i) {
        const double u = ees.eigenvalues()[i];
        if (1.0 + u <= 1e-14) return std::numeric_limits<double>::infinity();
        total += kl_kernel(u);
    }
    const Vec delta = whiten * (q.mean - p.mean);
    return 0.5 * (total + delta.squaredNorm());
}

double w2_gaussian(const GaussianMeasure& p, const GaussianMeasure& q)
{
    if (p.dim() != q.dim()) throw UnsupportedDimension("w2_gaussian: dimension mismatch");
    const Mat rq = psd_sqrt(q.cov);
    const Mat cross = psd_sqrt(rq * p.cov * rq);
    const double bures = (p.cov + q.cov - 2.0 * cross).trace();
    return std::sqrt(std::max(0.0, (p.mean - q.mean).squaredNorm() + bures));
}

}  // namespace chaoslab
