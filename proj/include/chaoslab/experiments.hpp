#pragma once

#include <string>
#include <vector>

#include "chaoslab/drift.hpp"
#include "chaoslab/ratefit.hpp"
#include "chaoslab/simulate.hpp"

namespace chaoslab {

/// One CSV produced by a suite; `suffix` is appended to the output stem
/// (empty for the primary table).
struct Table {
    std::string suffix;
    std::string csv;
};

struct ExperimentOutput {
    std::vector<Verdict> verdicts;
    std::vector<Table> tables;

    bool all_pass() const;
};

// Defaults below are the acceptance presets.

struct OracleRatesParams {
    LinearMeanField model{Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 0.5), Vec::Zero(1)};
    double sigma = 1.0;
    GaussianMeasure mu0{Vec::Zero(1), Mat::Constant(1, 1, 0.25)};
    std::vector<std::size_t> n_grid{32, 64, 128, 256, 512};
    std::vector<std::size_t> k_grid{1, 2, 4, 8};
    std::vector<double> t_grid{0.5, 1, 2, 5, 10, 20};
    double t_fit = 1.0;       // time at which the n and k slopes are fitted
    double early_until = 2.0; // uniform-in-time check: sup over t vs 2x sup over t <= early_until
    double n_tolerance = 0.2;
    double k_tolerance = 0.3;
};

/// Table `n,k,t,entropy,path_entropy`.
ExperimentOutput run_oracle_rates(const OracleRatesParams& p);

struct HierarchyCertifyParams {
    std::vector<std::size_t> n_grid{16, 64};
    std::vector<double> a_grid{0.5, 1.0, 2.0};
    std::vector<double> c_grid{0.0, 1.0};
    std::vector<int> p_grid{2, 3};
    std::vector<std::string> r_grid{"zero", "inverse_n2"};  // R_t = 0 or 1/n^2
    double b = 1.0;
    double C0 = 1.0;
    double T = 1.0;
    std::size_t moment_n = 256;
    double moment_a = 1.0;
    std::vector<double> moment_t{0.25, 0.5, 1.0};
    std::uint64_t seed = 1;
};

/// Tables `n,a,c,p,R,k,f_T,lemma_rhs,ratio` and (suffix `_moments`)
/// `q,t,k,value,bound`.
ExperimentOutput run_hierarchy_certify(const HierarchyCertifyParams& p);

struct FlowsCheckParams {
    double tangent_dt = 1e-4;
    double tangent_t = 1.0;
    ModelFamily fd_model = MeanNonlinearity{Mat::Constant(1, 1, -1.0), SmoothMap::scaled_tanh(0.2)};
    ModelFamily fd_extra = LangevinGradient{Potential::logcosh(1.0), Potential::quadratic_well(0.5), {}, 1};
    SimConfig fd_sim{1, 1, 1.0, 1e-3, 1.0, 0, InitialLaw::scalar_normal(1.0, 0.25), 1};
    double fd_x0 = 0.5;
    double fd_h = 1e-4;
    std::size_t fd_reference = 128;  // population driving non-mean-affine drifts
    LinearMeanField lions_model{Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 0.5), Vec::Zero(1)};
    SimConfig lions_sim{1, 1, 1.0, 1e-3, 10.0, 0, InitialLaw::scalar_normal(0.0, 0.25), 10};
    std::size_t lions_M = 10000;
    double lions_y = 0.0;
    double lions_check_t = 1.0;
    double lambda = 0.5;
    std::uint64_t seed = 1;
};

/// Table `t,quantity,value` plus (suffix `_fd`) `family,t,fd,ode,rel_error`.
ExperimentOutput run_flows_check(const FlowsCheckParams& p);

struct ChaosParams {
    // synchronous coupling
    bool coupling = true;
    LinearMeanField coupling_model{Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 0.5), Vec::Zero(1)};
    SimConfig coupling_sim{1, 1, 1.0, 0.01, 1.0, 0, InitialLaw::scalar_normal(0.0, 0.25), 1};
    std::vector<std::size_t> coupling_n{32, 64, 128, 256, 512};
    std::size_t coupling_replicas = 400;
    // weak chaos and remainder
    bool weak = true;
    bool remainder = true;
    ModelFamily model = MeanNonlinearity{Mat::Constant(1, 1, -1.0), SmoothMap::scaled_tanh(0.2)};  // mean-affine
    SimConfig sim{1, 1, 1.0, 0.01, 1.0, 0, InitialLaw::scalar_normal(1.0, 0.25), 1};
    std::vector<std::size_t> n_grid{16, 32, 64, 128, 256};
    std::size_t weak_replicas = 100000;
    std::size_t remainder_replicas = 50000;
    double tolerance = 0.3;
    std::size_t workers = 0;
};

/// Tables `_coupling` (`n,sup_gap_sq,stderr`), `_weak_mean` and
/// `_weak_quartic` (`n,gap,stderr`), `_remainder` (`n,mean_R,stderr`).
ExperimentOutput run_chaos_mc(const ChaosParams& p);

struct QuantizationParams {
    int d = 3;
    std::vector<std::size_t> n_grid{8, 16, 32, 64, 128};
    std::size_t replicas = 8;
    double regularization = 0.05;
    std::uint64_t seed = 1;
    std::size_t workers = 0;
};

/// Table `n,mean_w1,stderr`; the slope verdict is informational.
ExperimentOutput run_quantization_demo(const QuantizationParams& p);

}  // namespace chaoslab
