#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chaoslab/simulate.hpp"

namespace chaoslab {

/// Gauss-Legendre nodes and weights mapped to [0, 1].
struct Quadrature {
    std::vector<double> nodes, weights;
    static Quadrature gauss_legendre_32();
};

struct RemainderSpec {
    DriftModel drift;
    std::variant<GaussianMeasure, EmpiricalMeasure> reference;  // mu_T
    Quadrature s_rule = Quadrature::gauss_legendre_32();
    std::size_t mc_samples = 4000;  // draws of mu_T when it is Gaussian and no closed form is used
    std::uint64_t seed = 0;
    bool closed_form = true;        // use the bilinear reduction for mean-affine drifts
};

/// R(nu) = sum_s w_s int | iint flat2(s nu + (1-s) mu_T, x, y, z) d(nu - mu_T)^2(y, z) |^2 dnu(x).
///
/// Mean-affine drifts reduce exactly to |Delta^T d2F(m_s) Delta|^2 with
/// Delta = mean(nu) - mean(mu_T). Otherwise mu_T is represented by a sample
/// of mc_samples points (or the given empirical reference): the nu x mu
/// cross terms are full double sums, the mu x mu term uses disjoint
/// consecutive pairs of the sample. Cost O(|s| |nu| (|nu|^2 + |nu| M)).
double eval_remainder(const RemainderSpec& spec, const EmpiricalMeasure& nu);

struct ScalingRow {
    std::size_t n = 0;
    double value = 0.0;
    double standard_error = 0.0;
};

/// Header `n,<value_name>,stderr`.
void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows,
                       const std::string& value_name = "value");

/// E[R(m^n_T)] per n from `replicas` simulations of V_dynamics with cfg
/// (cfg.n is replaced by each grid entry).
std::vector<ScalingRow> remainder_scaling(const RemainderSpec& spec, const DriftModel& V_dynamics,
                                          const SimConfig& cfg, const std::vector<std::size_t>& n_grid,
                                          std::size_t replicas, std::size_t workers = 0);

enum class VanishingOrder { generic, first_order_vanishing, second_order_vanishing };

struct WeakFunctional {
    std::function<double(const MeasureView&)> eval;
    VanishingOrder tag = VanishingOrder::generic;
    /// Set when Phi(nu) = f(mean(nu)); enables the control variate below.
    std::optional<std::function<double(const Vec&)>> mean_form;

    static WeakFunctional mean_value();                        // mean(nu), d = 1
    static WeakFunctional centered_quartic(double reference);  // (mean(nu) - reference)^4, d = 1
    static WeakFunctional constant(double c);
};

/// |E Phi_j(m^n_T) - oracle_values[j]| per n for several functionals
/// evaluated on the same replicas; one table per functional.
std::vector<std::vector<ScalingRow>> weak_chaos_gaps(const std::vector<WeakFunctional>& phis,
                                                     const DriftModel& V, const SimConfig& cfg,
                                                     const std::vector<std::size_t>& n_grid,
                                                     std::size_t replicas,
                                                     const std::vector<double>& oracle_values,
                                                     std::size_t workers = 0);

/// |E Phi(m^n_T) - oracle_value| per n.
///
/// When Phi has a mean form, V is mean-affine, d = 1 and mu_0 is Gaussian,
/// each replica also runs the particle system linearised around the limit
/// mean m_k with the same noise and initial points. Its empirical mean is
/// exactly Gaussian, N(m_k, s_k) with s_{k+1} = g_k^2 s_k + 2 dt sigma^2 / n,
/// g_k = 1 + dt (A + F'(m_k)), so E f(mean) is computed by quadrature and
/// only the small difference f(mean) - f(linearised mean) is sampled.
std::vector<ScalingRow> weak_chaos_gap(const WeakFunctional& phi, const DriftModel& V, const SimConfig& cfg,
                                       const std::vector<std::size_t>& n_grid, std::size_t replicas,
                                       double oracle_value, std::size_t workers = 0);

/// Law of the Euler-discretised limit of a mean-affine drift with Gaussian
/// mu_0 (exactly Gaussian: the limit SDE is linear given its mean path).
GaussianMeasure mean_affine_limit(const DriftModel& V, const SimConfig& cfg);

/// E[W1(m^n, gamma)] for the standard Gaussian gamma in R^d: each replica
/// draws n points and a fresh 10 n point reference and takes the debiased
/// Sinkhorn divergence with cost |x - y| at the given regularisation.
std::vector<ScalingRow> quantization_demo(int d, const std::vector<std::size_t>& n_grid, std::size_t replicas,
                                          std::uint64_t seed, double regularization = 0.05,
                                          std::size_t workers = 0);

}  // namespace chaoslab
