#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rflow/conformal.hpp"
#include "rflow/spectral.hpp"

namespace rflow {

/// Integration parameters of the conformal flow.
struct FlowConfig {
    double dt_init = 1e-3;
    double t_max = 10.0;
    int sample_every = 10;           ///< steps between recorded samples
    double convergence_tol = 1e-6;   ///< on max_i |R_i - r| / (1 + |r|)
    bool renormalize = true;         ///< rescale back to the initial area after each step
    double solver_tol = 1e-9;        ///< eigensolver residual tolerance at samples
    double min_angle_floor = 0.01;   ///< radians; step guard
    double amplitude = 0.0;          ///< initial perturbation, recorded for provenance
    std::uint64_t seed = 0;

    void validate() const;
};

/// One recorded state of the flow.
struct FlowSample {
    int step;
    double t;
    Eigen::VectorXd u;        ///< full snapshot; verification rebuilds L_t, M_t from it
    double lambda1;
    double total_area;
    double max_dev;           ///< max_i |R_i - r|
    double min_corner_angle;
};

/// Time-stamped history of a flow run, ending at the final state.
struct FlowTrace {
    std::vector<FlowSample> samples;
    bool converged = false;
    double t_final = 0.0;
    ConformalMetric final_metric;
    FlowConfig config;
    bool aborted = false;       ///< step collapse ended the run early
    std::string abort_reason;
};

/// Flow velocity du/dt = (r - R_i) / 2 per vertex.
Eigen::VectorXd velocity(const CurvatureState& state);

struct StepResult {
    ConformalMetric metric;
    double accepted_dt;
};

/**
 * One explicit Euler step u' = u + dt * velocity. The accepted dt is the
 * largest dt / 2^k (k <= 30) for which every face keeps the strict triangle
 * inequality and the minimum corner angle stays at or above the floor; with
 * renormalization on, the result is rescaled back to the incoming area.
 * Throws StepCollapseError when no k works.
 */
StepResult flow_step(const ConformalMetric& metric, double dt, const FlowConfig& config);

/**
 * Finite-difference check of the volume-element evolution over one
 * un-renormalized Euler step of size dt.
 *
 * The vertex mismatch compares (A_i' - A_i)/dt with the modeled rate
 * (r - R_i) A_i. Because sum_i (r - R_i) A_i = 0 exactly, the modeled total
 * rate is zero, but the lumped areas couple neighboring factors, so the
 * actual derivative carries a mesh-consistency residue that does not vanish
 * with dt: as dt -> 0 the vertex mismatch converges to that residue, while
 * the signed total-area drift A' - A is first order in dt (its coefficient
 * is the residue's weighted sum) and therefore halves when dt does.
 */
struct AreaEvolutionReport {
    double dt;
    double max_vertex_mismatch;  ///< max_i |(A_i' - A_i)/dt - (r - R_i) A_i|
    double total_area_drift;     ///< signed total' - total, O(dt)
};

/// Requires dt <= 1e-3 / max|R_i - r| (any dt at a fixed point).
AreaEvolutionReport area_evolution_check(const ConformalMetric& metric, double dt);

/**
 * Integrates the flow from metric0, recording a sample every
 * `sample_every` steps (eigenvalue included) plus always the final state.
 * Stops converged when max_i |R_i - r| <= convergence_tol * (1 + |r|), or
 * unconverged at t_max. A step collapse aborts with the partial trace flagged.
 */
FlowTrace run_flow(const ConformalMetric& metric0, const FlowConfig& config);

}  // namespace rflow
