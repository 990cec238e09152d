#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chaoslab/measure.hpp"

namespace chaoslab {

// Derivative slots bind a measure once and then evaluate pointwise, so that
// any O(|mu|) work (means, kernel integrals) is paid once per measure.
using Flat1Fn = std::function<Vec(const Vec& x, const Vec& y)>;
using Flat2Fn = std::function<Vec(const Vec& x, const Vec& y, const Vec& z)>;
using WgradFn = std::function<Mat(const Vec& x, const Vec& y)>;
using XgradFn = std::function<Mat(const Vec& x)>;

using BatchDrift =
    std::function<void(const MeasureView& mu, std::span<const double> xs, std::span<double> out)>;

enum class Structure {
    generic,
    mean_affine,  // V(mu, x) = A x + F(mean(mu))
    pairwise,     // V(mu, x) = int phi(x, y) dmu(y); second flat derivative vanishes
};

/// V(mu, x) = A x + F(mean(mu)); carried by mean-affine models so that the
/// limit mean and its linearisation can be computed without sampling.
struct MeanAffineForm {
    Mat A;
    std::function<Vec(const Vec&)> F;
    std::function<Mat(const Vec&)> dF;
    std::function<std::vector<Mat>(const Vec&)> d2F;  // d2F(m)[i] = Hessian of F_i
};

/// The drift V(mu, x) together with whatever derivative stack is available.
///
/// `eval` is batched: it writes V(mu, x_i) for every row of `xs`. Cost is
/// O(|mu| + |xs|) for mean-affine models and O(|mu| * |xs|) otherwise.
/// flat1 is normalised so that flat1(mu)(x, 0) = 0. Values are immutable
/// after construction and safe to share between threads.
struct DriftModel {
    std::string name;
    int dim = 1;
    Structure structure = Structure::generic;

    BatchDrift eval;
    std::function<Flat1Fn(const MeasureView&)> flat1;
    std::function<Flat2Fn(const MeasureView&)> flat2;
    std::function<WgradFn(const MeasureView&)> wgrad;
    std::function<XgradFn(const MeasureView&)> xgrad;

    std::optional<MeanAffineForm> mean_affine;
    std::optional<double> lipschitz_bound;
    std::optional<double> wgrad_sup;

    Vec operator()(const MeasureView& mu, const Vec& x) const;

    /// Throws CapabilityError naming the first missing slot.
    void require(bool need_flat1, bool need_flat2, bool need_wgrad, bool need_xgrad) const;
};

// ---------------------------------------------------------------------------
// Building blocks for the model families

/// g: R^d -> R^d with Jacobian and per-component Hessians.
struct SmoothMap {
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;
    std::function<std::vector<Mat>(const Vec&)> hessians;
    double jacobian_sup = std::numeric_limits<double>::infinity();

    static SmoothMap scaled_tanh(double scale);  // componentwise scale * tanh
    static SmoothMap scaled_sin(double scale);   // componentwise scale * sin
    static SmoothMap linear(const Mat& B);
    static SmoothMap zero();
};

/// phi(x, y) in R^d with its x- and y-Jacobians.
struct PairInteraction {
    std::function<Vec(const Vec&, const Vec&)> value;
    std::function<Mat(const Vec&, const Vec&)> dx;
    std::function<Mat(const Vec&, const Vec&)> dy;
    double dy_sup = std::numeric_limits<double>::infinity();

    /// phi(x, y) = -kappa x + scale * sin(x - y), componentwise.
    static PairInteraction confined_sine(double kappa, double scale);
    /// phi(x, y) = A x + B y.
    static PairInteraction linear(const Mat& A, const Mat& B);
};

/// h(x, y) in R^k with Jacobians (k x d).
struct InnerKernel {
    int out_dim = 1;
    std::function<Vec(const Vec&, const Vec&)> value;
    std::function<Mat(const Vec&, const Vec&)> dx;
    std::function<Mat(const Vec&, const Vec&)> dy;
    double dy_sup = std::numeric_limits<double>::infinity();

    /// h(x, y) = exp(-|x - y|^2 / (2 width^2)), k = 1.
    static InnerKernel gaussian_bump(double width);
};

/// G(x, u) in R^d, u in R^k, with dG/dx (d x d), dG/du (d x k) and the
/// per-component Hessians in u (k x k each).
struct OuterMap {
    std::function<Vec(const Vec&, const Vec&)> value;
    std::function<Mat(const Vec&, const Vec&)> dx;
    std::function<Mat(const Vec&, const Vec&)> du;
    std::function<std::vector<Mat>(const Vec&, const Vec&)> duu;
    double du_sup = std::numeric_limits<double>::infinity();

    /// G(x, u) = -kappa x + scale * tanh(u_0) * (1, ..., 1).
    static OuterMap confined_tanh(double kappa, double scale);
};

/// Scalar potential with gradient and Hessian.
struct Potential {
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hessian;
    double hessian_sup = std::numeric_limits<double>::infinity();
    bool quadratic = false;

    static Potential quadratic_well(double curvature);  // curvature/2 |x|^2
    static Potential logcosh(double scale);             // scale * sum_j log cosh x_j
};

struct LinearMeanField {
    Mat A, B;
    Vec b0;
};  // V = b0 + A x + B mean(mu)

struct MeanNonlinearity {
    Mat A;
    SmoothMap g;
};  // V = A x + g(mean(mu))

struct PairwiseKernel {
    PairInteraction phi;
    int dim = 1;
};  // V = int phi(x, y) dmu(y)

struct KernelComposition {
    OuterMap G;
    InnerKernel h;
    int dim = 1;
};  // V = G(x, int h(x, y) dmu(y))

struct LangevinGradient {
    Potential U;
    Potential W;
    std::optional<Potential> g;
    int dim = 1;
};  // V = -grad U(x) - int grad W(x - y) dmu(y) - grad g(mean(mu))

using ModelFamily =
    std::variant<LinearMeanField, MeanNonlinearity, PairwiseKernel, KernelComposition, LangevinGradient>;

DriftModel make_family(const ModelFamily& spec);

/// Convenience for the scalar linear model used throughout the tests.
DriftModel linear_drift(double a, double b, double b0 = 0.0);

// ---------------------------------------------------------------------------
// Consistency and structural checks

struct FlatDerivativeReport {
    Vec fd_value;         // extrapolated limit of the difference quotients
    Vec analytic_value;   // integral of flat1 against (eta - nu)
    double rel_error = 0.0;
    std::vector<Vec> quotients;  // raw quotient per h
};

/// Compares [V((1-h) nu + h eta, x) - V(nu, x)] / h, extrapolated to h -> 0
/// over h_grid, with int flat1(nu, x, y) d(eta - nu)(y).
FlatDerivativeReport check_flat_derivative(const DriftModel& V, const EmpiricalMeasure& nu,
                                           const EmpiricalMeasure& eta, const Vec& x,
                                           const std::vector<double>& h_grid = {1e-2, 5e-3, 2.5e-3});

/// Same comparison one level up: flat1 differenced in the measure argument
/// against int flat2(nu, x, y, z) d(eta - nu)(z).
FlatDerivativeReport check_second_flat_derivative(const DriftModel& V, const EmpiricalMeasure& nu,
                                                  const EmpiricalMeasure& eta, const Vec& x,
                                                  const Vec& y,
                                                  const std::vector<double>& h_grid = {1e-2, 5e-3, 2.5e-3});

/// Draws a coupled pair (X, Y) for sample `index`; must be deterministic.
using PairSampler = std::function<std::pair<Vec, Vec>(std::uint64_t index)>;

struct GaussianPairOptions {
    double x_mean = 0.0;
    double x_scale = 1.0;
    double y_mean = 0.0;
    double y_scale = 1.0;
    double correlation = 0.0;  // between the driving normals of X and Y
};

/// X = x_mean + x_scale Z1, Y = y_mean + y_scale (rho Z1 + sqrt(1-rho^2) Z2),
/// componentwise, keyed on (seed, index).
PairSampler gaussian_pair_sampler(int dim, std::uint64_t seed, const GaussianPairOptions& options = {});

struct MonotonicityReport {
    double empirical_lhs = 0.0;  // E[(V(L(X),X) - V(L(Y),Y)) . (X - Y)]
    double empirical_rhs = 0.0;  // -lambda E|X - Y|^2
    double margin = 0.0;         // rhs - lhs
    double standard_error = 0.0; // bootstrap, 200 resamples
    bool pass = false;
};

MonotonicityReport check_monotonicity(const DriftModel& V, const PairSampler& pairs, double lambda,
                                      std::size_t n_samples, std::uint64_t bootstrap_seed = 7);

struct QuadraticFormReport {
    double form = 0.0;  // E[Y^T wgrad(L(X), X, X') Y' + Y^T xgrad(L(X), X) Y]
    double rhs = 0.0;   // -lambda E|Y|^2
    double standard_error = 0.0;
    bool pass = false;
};

/// (X', Y') is an independent copy taken from sampler indices n..2n-1.
QuadraticFormReport check_quadratic_form(const DriftModel& V, const PairSampler& sampler, double lambda,
                                         std::size_t n_samples);

/// max over x, y in grid of the operator norm of wgrad(mu)(x, y).
double probe_wgrad_sup(const DriftModel& V, const MeasureView& mu, const std::vector<Vec>& grid);

}  // namespace chaoslab
