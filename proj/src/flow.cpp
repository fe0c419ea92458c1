#include "rflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rflow/errors.hpp"

namespace rflow {

void FlowConfig::validate() const {
    if (!(dt_init > 0.0)) throw std::invalid_argument("dt_init must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
    if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence_tol must be positive");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("solver_tol must be positive");
    if (!(min_angle_floor > 0.0)) throw std::invalid_argument("min_angle_floor must be positive");
    if (amplitude < 0.0) throw std::invalid_argument("amplitude must be >= 0");
}

Eigen::VectorXd velocity(const CurvatureState& state) {
    return (0.5 * (state.r - state.R.array())).matrix();
}

namespace {

/// One Euler step from an already-computed curvature state (the caller's
/// convergence check needs that state anyway, so it is not recomputed here).
StepResult step_from_state(const ConformalMetric& metric, const CurvatureState& state,
                           double dt, const FlowConfig& config) {
    const double area_before = state.total_area;
    const Eigen::VectorXd du = velocity(state);

    ConformalMetric candidate = metric;
    for (int k = 0; k <= 30; ++k) {
        const double attempted = dt * std::ldexp(1.0, -k);
        candidate.u = metric.u + attempted * du;
        const auto measured = try_measure(candidate);
        if (measured && measured->min_corner_angle >= config.min_angle_floor) {
            if (config.renormalize)
                candidate.u.array() += 0.5 * std::log(area_before / measured->total_area);
            return StepResult{std::move(candidate), attempted};
        }
    }

    // Name the face with the least triangle-inequality slack at the smallest
    // attempted step.
    candidate.u = metric.u + dt * std::ldexp(1.0, -30) * du;
    const Eigen::VectorXd induced = candidate.induced_lengths();
    int face = -1;
    double worst = std::numeric_limits<double>::infinity();
    for (int f = 0; f < candidate.mesh->face_count(); ++f) {
        const auto& fe = candidate.mesh->face_edges(f);
        const double a = induced[fe[0]], b = induced[fe[1]], c = induced[fe[2]];
        const double slack = std::min({b + c - a, c + a - b, a + b - c});
        if (slack < worst) {
            worst = slack;
            face = f;
        }
    }
    throw StepCollapseError("step collapse: no valid step down to dt / 2^30, worst face " +
                                std::to_string(face),
                            face);
}

}  // namespace

StepResult flow_step(const ConformalMetric& metric, double dt, const FlowConfig& config) {
    if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be positive");
    return step_from_state(metric, curvature_state(metric), dt, config);
}

AreaEvolutionReport area_evolution_check(const ConformalMetric& metric, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("area_evolution_check: dt must be positive");
    const CurvatureState state = curvature_state(metric);
    const double max_dev = (state.R.array() - state.r).abs().maxCoeff();
    if (max_dev > 0.0 && dt > 1e-3 / max_dev)
        throw std::invalid_argument(
            "area_evolution_check: dt exceeds 1e-3 of the characteristic time 1/max|R-r|");

    ConformalMetric stepped = metric;
    stepped.u += dt * velocity(state);
    const Eigen::VectorXd areas_after = vertex_areas(stepped);

    const Eigen::ArrayXd fd_rate = (areas_after - state.A).array() / dt;
    const Eigen::ArrayXd predicted = (state.r - state.R.array()) * state.A.array();
    AreaEvolutionReport report;
    report.dt = dt;
    report.max_vertex_mismatch = (fd_rate - predicted).abs().maxCoeff();
    report.total_area_drift = areas_after.sum() - state.total_area;
    return report;
}

FlowTrace run_flow(const ConformalMetric& metric0, const FlowConfig& config) {
    config.validate();
    validate_triangles(metric0);

    FlowTrace trace;
    trace.config = config;

    ConformalMetric metric = metric0;
    double t = 0.0;
    int step = 0;
    int last_recorded_step = -1;

    auto record = [&](const CurvatureState& state, double max_dev) {
        const SpectralSolution eig =
            first_nonzero_eigenpair(assemble_stiffness(metric), assemble_mass(metric),
                                    config.solver_tol);
        FlowSample sample;
        sample.step = step;
        sample.t = t;
        sample.u = metric.u;
        sample.lambda1 = eig.lambda1;
        sample.total_area = state.total_area;
        sample.max_dev = max_dev;
        sample.min_corner_angle = min_corner_angle(metric);
        trace.samples.push_back(std::move(sample));
        last_recorded_step = step;
    };

    while (true) {
        const CurvatureState state = curvature_state(metric);
        const double max_dev = (state.R.array() - state.r).abs().maxCoeff();
        const bool converged = max_dev <= config.convergence_tol * (1.0 + std::abs(state.r));
        const bool timed_out = !converged && t >= config.t_max;

        if (converged || timed_out || step % config.sample_every == 0) record(state, max_dev);
        if (converged) {
            trace.converged = true;
            break;
        }
        if (timed_out) break;

        try {
            StepResult result = step_from_state(metric, state, config.dt_init, config);
            metric = std::move(result.metric);
            t += result.accepted_dt;
            ++step;
        } catch (const StepCollapseError& err) {
            if (last_recorded_step != step) record(state, max_dev);
            trace.aborted = true;
            trace.abort_reason = err.what();
            break;
        }
    }

    trace.t_final = t;
    trace.final_metric = std::move(metric);
    return trace;
}

}  // namespace rflow
