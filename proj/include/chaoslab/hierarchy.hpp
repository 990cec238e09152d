#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "chaoslab/types.hpp"

namespace chaoslab {

/// Yule process with birth rate a k stopped at level n:
/// (G phi)(k) = a k (phi(k+1) - phi(k)) for k < n, 0 at k = n.
/// Vectors are indexed by k - 1.
struct YuleGenerator {
    std::size_t n = 1;
    double a = 1.0;

    void validate() const;
    std::vector<double> apply(const std::vector<double>& phi) const;
};

/// e^{tG} phi by RK4 on phi' = G phi, with a n dt <= 0.01.
std::vector<double> semigroup_apply(const YuleGenerator& gen, const std::vector<double>& phi, double t);

struct MomentBoundReport {
    double max_violation = 0.0;        // max over k, t of e^{tG} m_q(k) - 8 e^{qat} k^q, clipped at 0
    double max_ratio = 0.0;            // max over k, t of e^{tG} m_q(k) / (8 e^{qat} k^q)
    std::size_t violations = 0;
    std::size_t monotonicity_failures = 0;  // random ordered pairs phi >= psi mapped out of order
    std::vector<std::vector<double>> values;  // e^{tG} m_q per t in the grid
};

MomentBoundReport check_moment_bounds(const YuleGenerator& gen, const std::vector<double>& t_grid, int q,
                                      std::size_t ordered_pairs = 16, std::uint64_t seed = 1);

struct HierarchyState {
    std::vector<double> f;  // f(k), k = 1..n
    double t = 0.0;
    bool nondecreasing = true;  // validation result, not enforced
};

using RateFn = std::function<double(double t)>;

struct HierarchyParams {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    int p = 2;
    double C0 = 1.0;
    double s = 0.0;
    double T = 1.0;
    RateFn R = [](double) { return 0.0; };
};

/// f'(k) = a k (f(k+1) - f(k)) 1_{k<n} + b k^p / n^2 + k R(t) - c f(k) on [s, T], RK4.
HierarchyState integrate_hierarchy(const YuleGenerator& gen, const HierarchyParams& params,
                                   const std::vector<double>& f0);

struct LemmaReport {
    double max_ratio = 0.0;
    std::vector<double> rhs;
    std::vector<double> ratio;
};

/// Right-hand side of the Gronwall-type bound
///   2 C0 k^2/n^2 e^{(2a-c)(T-s)} + 8 b k^p/n^2 int_s^T e^{(ap-c)(t-s)} dt
///   + k int_s^T e^{(a-c)(t-s)} R_t dt
/// and the ratio f_T(k) / RHS(k). Throws PreconditionError unless
/// f0(k) <= C0 k^2 / n^2.
LemmaReport check_lemma_bound(const HierarchyState& result, const std::vector<double>& f0,
                              const HierarchyParams& params);

}  // namespace chaoslab
