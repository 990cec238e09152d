#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chaoslab/drift.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {

/// Initial law mu_0: either Gaussian (iid draws) or an explicit point set
/// of exactly n points, row-major.
struct InitialLaw {
    std::optional<GaussianMeasure> gaussian;
    std::vector<double> points;

    static InitialLaw normal(Vec mean, Mat cov);
    static InitialLaw scalar_normal(double mean, double variance);
    static InitialLaw explicit_points(std::vector<double> coords);
};

struct SimConfig {
    std::size_t n = 1;
    int d = 1;
    double sigma = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    InitialLaw init = InitialLaw::scalar_normal(0.0, 1.0);
    std::size_t record_stride = 1;  // keep every k-th state; the final state is always kept

    /// Throws DomainError on invalid fields, including t_end not a multiple of dt.
    void validate() const;
    std::size_t steps() const;
};

/// Draws the n initial points of replica `replica` (row-major n x d).
std::vector<double> sample_initial(const SimConfig& cfg, std::uint64_t replica,
                                   Stream stream = Stream::initial);

struct Trajectory {
    std::size_t n = 0;
    int d = 1;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::size_t> steps;           // Euler step index of each stored state
    std::vector<std::vector<double>> states;  // row-major n x d per stored time

    MeasureView at(std::size_t i) const { return {states[i], {}, d}; }
    const std::vector<double>& final_state() const { return states.back(); }

    /// Header `t,particle,dim0,...,dim{d-1}`.
    void write_csv(std::ostream& os) const;
};

/// Euler-Maruyama for the n-particle system driven by its own empirical
/// measure. Cost per step is one V.eval on the full cloud. Throws
/// DivergenceError when a coordinate becomes non-finite or exceeds 1e8.
Trajectory run_particles(const DriftModel& V, const SimConfig& cfg, std::uint64_t replica = 0);

/// Large independent population approximating mu_t; uses the reference
/// RNG streams so it never shares noise with run_particles.
Trajectory run_mckean_reference(const DriftModel& V, const SimConfig& cfg, std::size_t n_ref = 100000);

/// mu_t on the Euler grid, one measure per step.
class ReferenceFlow {
public:
    /// Requires a trajectory recorded at every step.
    static ReferenceFlow from_trajectory(Trajectory traj);

    /// Single atom at m_t: exact for drifts that see mu only through its mean.
    static ReferenceFlow mean_path(std::vector<Vec> means, double dt);

    int dim() const { return traj_.d; }
    double dt() const { return traj_.dt; }
    std::size_t steps() const { return traj_.states.size() - 1; }
    bool atomic_mean() const { return atomic_mean_; }
    MeasureView at_step(std::size_t k) const { return traj_.at(k); }

private:
    Trajectory traj_;
    bool atomic_mean_ = false;
};

/// Mean of the Euler-discretized McKean-Vlasov limit for a mean-affine
/// drift: m_{k+1} = m_k + dt (A m_k + F(m_k)). Requires V.mean_affine.
std::vector<Vec> euler_mean_path(const DriftModel& V, const Vec& m0, double dt, std::size_t steps);

struct CouplingReport {
    double sup_gap_sq_per_particle = 0.0;  // E (1/n) sum_i sup_t |Y^i_t - Xbar^i_t|^2
    double standard_error = 0.0;
    std::vector<double> times;
    std::vector<double> per_time_gaps;     // E (1/n) sum_i |Y^i_t - Xbar^i_t|^2
    std::size_t replicas = 0;
};

/// Y (interacting) and Xbar (independent copies driven by mu_flow) share
/// initial points and noise increments. Replicas run on `workers` threads
/// (0 = hardware concurrency); the result does not depend on the count.
CouplingReport run_synchronous_coupling(const DriftModel& V, const SimConfig& cfg,
                                        const ReferenceFlow& mu_flow, std::size_t replicas = 1,
                                        std::size_t workers = 0);

}  // namespace chaoslab
