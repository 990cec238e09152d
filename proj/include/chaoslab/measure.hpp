#pragma once

#include <span>
#include <vector>

#include "chaoslab/types.hpp"

namespace chaoslab {

/// Non-owning view of a (possibly weighted) point cloud in R^dim.
/// Points are stored row-major: point i occupies coords[i*dim, (i+1)*dim).
/// Empty `weights` means uniform weights 1/size().
struct MeasureView {
    std::span<const double> coords;
    std::span<const double> weights;
    int dim = 1;

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
    double weight(std::size_t i) const
    {
        return weights.empty() ? 1.0 / static_cast<double>(size()) : weights[i];
    }
    ConstVecMap point(std::size_t i) const
    {
        return ConstVecMap(coords.data() + i * static_cast<std::size_t>(dim), dim);
    }
};

/// Uniform atomic measure (1/n) sum_i delta_{x_i}.
///
/// A weighted variant exists only as the output of `mixture`, which the
/// flat-derivative checks use to realise (1-h) nu + h eta without resampling.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::vector<double> coords, int dim);

    static EmpiricalMeasure from_points(const std::vector<Vec>& points);
    static EmpiricalMeasure from_scalars(std::vector<double> values);
    static EmpiricalMeasure atom(const Vec& x);

    int dim() const { return dim_; }
    std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
    bool uniform() const { return weights_.empty(); }

    ConstVecMap point(std::size_t i) const { return view().point(i); }
    double weight(std::size_t i) const { return view().weight(i); }
    std::span<const double> coords() const { return coords_; }
    std::span<const double> weights() const { return weights_; }
    MeasureView view() const { return {coords_, weights_, dim_}; }

    /// (1-h) nu + h eta as a weighted cloud on the union of atoms.
    friend EmpiricalMeasure mixture(const MeasureView& nu, const MeasureView& eta, double h);

private:
    EmpiricalMeasure(std::vector<double> coords, std::vector<double> weights, int dim);

    std::vector<double> coords_;
    std::vector<double> weights_;
    int dim_;
};

EmpiricalMeasure mixture(const MeasureView& nu, const MeasureView& eta, double h);

struct GaussianMeasure {
    Vec mean;
    Mat cov;

    int dim() const { return static_cast<int>(mean.size()); }
    /// Throws DomainError unless cov is symmetric (1e-12) with eigenvalues >= -1e-12.
    void validate() const;
};

Vec mean(const MeasureView& mu);
inline Vec mean(const EmpiricalMeasure& mu) { return mean(mu.view()); }

/// Exact W1 in dimension one via the quantile functions on the merged
/// grid {i/n} u {j/m}; unequal sizes and weighted clouds are allowed.
double w1_1d(const MeasureView& mu, const MeasureView& nu);
inline double w1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu)
{
    return w1_1d(mu.view(), nu.view());
}

struct SinkhornOptions {
    double tolerance = 1e-9;        // L1 marginal violation
    std::size_t max_iterations = 10000;
    int cost_power = 2;             // 2: W2 with |x-y|^2, 1: W1 with |x-y|
    bool anneal = true;             // epsilon-scaling warm start
};

struct SinkhornResult {
    double distance = 0.0;          // debiased divergence raised to 1/cost_power
    double divergence = 0.0;        // OT_e(mu,nu) - (OT_e(mu,mu) + OT_e(nu,nu))/2
    std::size_t iterations = 0;
};

/// Debiased entropic estimate (Sinkhorn divergence) of W_p, log-domain
/// updates. Throws IterationLimit carrying the last duality gap.
SinkhornResult sinkhorn_divergence(const MeasureView& mu, const MeasureView& nu,
                                   double regularization, const SinkhornOptions& options = {});

double w2_sinkhorn(const MeasureView& mu, const MeasureView& nu, double regularization);
inline double w2_sinkhorn(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          double regularization)
{
    return w2_sinkhorn(mu.view(), nu.view(), regularization);
}

/// Symmetric PSD square root; eigenvalues clamped at 0.
Mat psd_sqrt(const Mat& s);

/// KL(p || q). Singular q throws SingularCovariance; singular p returns +inf.
double kl_gaussian(const GaussianMeasure& p, const GaussianMeasure& q);

/// Bures-Wasserstein distance W2(p, q).
double w2_gaussian(const GaussianMeasure& p, const GaussianMeasure& q);

/// x - log(1 + x), accurate near 0 (the KL kernel per eigenvalue).
double kl_kernel(double x);

}  // namespace chaoslab
