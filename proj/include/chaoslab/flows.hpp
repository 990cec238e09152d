#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include "chaoslab/simulate.hpp"

namespace chaoslab {

/// One path X_t from x0 driven by mu_t and its spatial derivative J_t.
struct TangentFlow {
    std::vector<double> times;
    std::vector<Vec> base_path;
    std::vector<Mat> jacobian;  // starts at the identity
};

/// Euler-Maruyama for X and Euler for J' = xgrad(mu_t, X_t) J on the
/// grid of cfg (cfg.n is ignored; the path uses replica `replica`).
TangentFlow simulate_tangent(const DriftModel& V, const SimConfig& cfg, const ReferenceFlow& mu_flow,
                             const Vec& x0, std::uint64_t replica = 0);

/// Lions derivative of the flow in direction y, law level and pointwise.
///
/// mu_t is represented by M copies of X^{0,nu} interacting through their
/// own empirical measure (bias O(1/M)). Alongside run M copies of the
/// path started at y with their tangents J^y, the M law-level flows
///   Z_i' = xgrad(X_i) Z_i + avg_j wgrad(X_i, X^y_j) J^y_j + avg_j wgrad(X_i, X_j) Z_j
/// and the pointwise flow xi at x0, which uses X^{x0} as the first
/// argument in both averages. Mean-affine drifts take an O(M) path per
/// step; other drifts cost O(M^2).
struct LionsFlow {
    std::size_t ensemble_size = 0;
    Vec y;
    std::vector<double> times;
    std::vector<Mat> xi_point;
    std::vector<Mat> xi_law_mean;       // ensemble mean of Z (zeta)
    std::vector<double> xi_law_ms;      // ensemble mean of |Z|_F^2
};

LionsFlow simulate_lions(const DriftModel& V, const SimConfig& cfg, const Vec& x0, const Vec& y,
                         std::size_t M);

struct DecayReport {
    double peak = 0.0;   // running peak of |J| or of the Lions-flow RMS
    double tail = 0.0;   // value at the horizon
    double ratio = 0.0;  // tail / peak
    double contraction = 0.0;  // tangent flows: sup_t |J_t| e^{lambda t}
    bool pass = false;
};

/// Tangent flows pass iff sup_t |J_t| e^{lambda t} <= 1 + 1e-6. Lions flows
/// pass iff the root-mean-square of Z at the horizon is at most 5% of its
/// running peak. Throws PreconditionError unless V passes
/// check_quadratic_form at lambda on a standard Gaussian sampler.
DecayReport check_decay(const DriftModel& V, double lambda, double horizon,
                        const std::variant<TangentFlow, LionsFlow>& flow);

/// Header `t,quantity,value`.
void write_decay_csv(std::ostream& os, const TangentFlow& tangent, const LionsFlow& lions);

}  // namespace chaoslab
