#pragma once

#include <cstddef>

#include "chaoslab/drift.hpp"
#include "chaoslab/measure.hpp"

namespace chaoslab {

/// dY^i = (b0 + A Y^i + B mean(Y)) dt + sqrt(2) sigma dW^i.
struct LinearGaussianModel {
    Mat A, B;
    Vec b0;
    double sigma = 1.0;

    int dim() const { return static_cast<int>(A.rows()); }
    void validate() const;
    static LinearGaussianModel from(const LinearMeanField& f, double sigma);
};

/// Law of n exchangeable particles: common mean, within-particle covariance
/// var_block and cross-particle covariance cov_block.
struct GaussianState {
    std::size_t n = 1;
    Vec mean;
    Mat var_block;
    Mat cov_block;

    int dim() const { return static_cast<int>(mean.size()); }
    /// Throws DomainError unless var - cov and var + (n-1) cov are PSD.
    void validate() const;
    /// n iid draws from mu0.
    static GaussianState iid(std::size_t n, const GaussianMeasure& mu0);
};

struct LimitState {
    Vec mean;
    Mat cov;
};

/// Exchangeable reduction: with D = var - cov,
///   D' = A D + D A^T + 2 sigma^2 I,
///   C' = (A+B) C + C (A+B)^T + (B D + D B^T) / n,
///   m' = (A+B) m + b0,
/// integrated by RK4 with steps no longer than max_dt.
GaussianState evolve_particle_law(const LinearGaussianModel& model, const GaussianState& init, double t,
                                  double max_dt = 1e-4);

/// m' = (A+B) m + b0, S' = A S + S A^T + 2 sigma^2 I.
LimitState evolve_limit_law(const LinearGaussianModel& model, const LimitState& init, double t,
                            double max_dt = 1e-4);

/// Joint law of the first k particles (dimension k*d).
GaussianMeasure k_marginal(const GaussianState& state, std::size_t k);

/// KL(pi^k || mu^{(x)k}) from the two eigenvalue groups of the whitened
/// block matrix; cost O(d^3) for any k.
double marginal_entropy(const GaussianState& state, const LimitState& limit, std::size_t k);

/// (k / 4 sigma^2) E|V(mu_t, Y^1) - E[V(m^n_t, Y^1) | Y^1..Y^k]|^2.
double path_entropy_rate(const LinearGaussianModel& model, const GaussianState& state,
                         const LimitState& limit, std::size_t k);

/// Entropy table on a time grid for each k: the marginal entropy at t and
/// the path entropy (integral of the rate over [0, t], composite Simpson on
/// panels no wider than `panel`). Rows are ordered by k, then t.
struct EntropyRow {
    std::size_t k = 1;
    double t = 0.0;
    double entropy = 0.0;
    double path_entropy = 0.0;
};
std::vector<EntropyRow> entropy_profile(const LinearGaussianModel& model, std::size_t n,
                                        const std::vector<std::size_t>& k_grid,
                                        const GaussianMeasure& mu0, const std::vector<double>& t_grid,
                                        double panel = 0.01);

}  // namespace chaoslab
