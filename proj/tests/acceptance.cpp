/// Acceptance suite: end-to-end checks of the laboratory against its
/// analytically anchored targets. Prints one [PASS]/[FAIL] line per criterion
/// and exits with the number of failures, so the whole gate reads at a glance.
///
/// The three scenario runs (sphere, torus, genus 2) are produced once, under
/// criterion 6's budget, and the criteria that examine the same runs (5 and 8)
/// reuse those artifacts instead of recomputing them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <rflow/config.hpp>
#include <rflow/conformal.hpp>
#include <rflow/errors.hpp>
#include <rflow/flow.hpp>
#include <rflow/io.hpp>
#include <rflow/mesh.hpp>
#include <rflow/spectral.hpp>
#include <rflow/verify.hpp>

#include "support.hpp"

using namespace rflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CriterionResult {
    int id = 0;
    bool pass = true;
    double seconds = 0.0;
    double budget = 0.0;
    std::string detail;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

/// Everything the scenario-sharing criteria exchange.
struct SharedRuns {
    std::filesystem::path dir;
    ConformalMetric sphere_initial;
    FlowTrace sphere_trace;
    VerificationReport sphere_report;
    FlowTrace torus_trace;
    VerificationReport torus_report;
    FlowTrace genus2_trace;
    VerificationReport genus2_report;
};

ConformalMetric sphere_scenario_metric() {
    auto mesh = std::make_shared<TriMesh>(build_icosphere(3, 1.0));
    ConformalMetric metric = metric_from_positions(mesh);
    metric = rescale_to_area(metric, 4.0 * kPi);
    return perturb(metric, 0.3, 42);
}

FlowConfig sphere_scenario_flow() {
    FlowConfig config;
    config.dt_init = 1e-3;
    config.t_max = 1000.0;
    config.sample_every = 100;
    config.convergence_tol = 1e-6;
    config.amplitude = 0.3;
    config.seed = 42;
    return config;
}

ConformalMetric torus_scenario_metric() {
    auto torus = build_flat_torus(16, 16, 1.0, 1.0);
    return perturb(torus.metric, 0.2, 7);
}

FlowConfig torus_scenario_flow() {
    FlowConfig config;
    config.dt_init = 5e-4;  // explicit Euler stability: the 16x16 grid's
    config.t_max = 50.0;    // stiffest mode exceeds what dt 1e-3 tolerates
    config.sample_every = 25;
    config.convergence_tol = 1e-6;
    config.amplitude = 0.2;
    config.seed = 7;
    return config;
}

ConformalMetric genus2_scenario_metric(const std::string& fixture_dir) {
    auto mesh = std::make_shared<TriMesh>(load_off_file(fixture_dir + "/genus2.off"));
    ConformalMetric metric = metric_from_positions(mesh);
    metric = rescale_to_area(metric, 4.0 * kPi);
    return perturb(metric, 0.1, 11);
}

FlowConfig genus2_scenario_flow() {
    FlowConfig config;
    config.dt_init = 1e-3;
    config.t_max = 200.0;
    config.sample_every = 20;
    config.convergence_tol = 1e-6;
    config.amplitude = 0.1;
    config.seed = 11;
    return config;
}

/// Criterion 1: discrete Gauss-Bonnet on 1000 random conformal metrics.
CriterionResult criterion_gauss_bonnet() {
    CriterionResult result{1, true, 0.0, 10.0, ""};
    Stopwatch timer;

    std::vector<ConformalMetric> bases;
    bases.push_back(testutil::tetra_metric());
    for (int s = 0; s <= 3; ++s) {
        auto mesh = std::make_shared<TriMesh>(build_icosphere(s, 1.0));
        bases.push_back(metric_from_positions(mesh));
    }
    for (int n : {4, 8, 12, 16}) bases.push_back(build_flat_torus(n, n, 1.0, 1.0).metric);

    double worst = 0.0;
    std::uint64_t seed = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ConformalMetric& base = bases[trial % bases.size()];
        ConformalMetric metric;
        for (;;) {
            try {
                metric = perturb(base, 0.3, seed++);
                break;
            } catch (const GeometryError&) {
                // that draw broke a triangle inequality; take the next seed
            }
        }
        const CurvatureState state = curvature_state(metric);
        const double target = 2.0 * kPi * metric.mesh->euler_characteristic();
        worst = std::max(worst, std::abs(state.K.sum() - target));
    }
    result.seconds = timer.seconds();
    result.pass = worst < 1e-10;
    result.detail = fmt("Gauss-Bonnet over 1000 random metrics, max |sum K - 2 pi chi| = %.2e",
                        worst);
    return result;
}

/// Criterion 2: iterative eigensolver vs the dense reference on every mesh
/// of at most 500 vertices in the fixture set.
CriterionResult criterion_oracle_equivalence(const std::string& fixture_dir) {
    CriterionResult result{2, true, 0.0, 30.0, ""};
    Stopwatch timer;

    std::vector<std::pair<std::string, ConformalMetric>> fixtures;
    fixtures.emplace_back("tetrahedron", testutil::tetra_metric());
    for (int s = 0; s <= 2; ++s) {
        auto mesh = std::make_shared<TriMesh>(build_icosphere(s, 1.0));
        fixtures.emplace_back(fmt("icosphere(%d)", s), metric_from_positions(mesh));
    }
    for (int n : {4, 8, 12, 16})
        fixtures.emplace_back(fmt("torus %dx%d", n, n),
                              build_flat_torus(n, n, 1.0, 1.0).metric);
    {
        auto mesh = std::make_shared<TriMesh>(load_off_file(fixture_dir + "/genus2.off"));
        fixtures.emplace_back("genus-2", metric_from_positions(mesh));
    }

    double worst = 0.0;
    std::string worst_name;
    for (const auto& [name, metric] : fixtures) {
        if (metric.mesh->vertex_count() > 500) continue;
        const StiffnessMatrix L = assemble_stiffness(metric);
        const MassMatrix M = assemble_mass(metric);
        const SpectralSolution sol = first_nonzero_eigenpair(L, M, 1e-10);
        const std::vector<double> dense = dense_reference_spectrum(L, M);
        if (std::abs(dense[0]) > 1e-9 * dense[1]) {
            result.pass = false;
            result.detail = fmt("%s: dense spectrum lost the kernel", name.c_str());
            result.seconds = timer.seconds();
            return result;
        }
        const double rel = std::abs(sol.lambda1 - dense[1]) / dense[1];
        if (rel > worst) {
            worst = rel;
            worst_name = name;
        }
    }
    result.seconds = timer.seconds();
    result.pass = worst <= 1e-8;
    result.detail = fmt("iterative vs dense lambda1 on %zu meshes, worst %.2e relative (%s)",
                        fixtures.size(), worst, worst_name.c_str());
    return result;
}

/// Criterion 3: spectral anchors with known continuum values.
CriterionResult criterion_spectral_anchors() {
    CriterionResult result{3, true, 0.0, 20.0, ""};
    Stopwatch timer;

    auto mesh = std::make_shared<TriMesh>(build_icosphere(3, 1.0));
    ConformalMetric sphere = rescale_to_area(metric_from_positions(mesh), 4.0 * kPi);
    const double sphere_lambda =
        first_nonzero_eigenpair(assemble_stiffness(sphere), assemble_mass(sphere), 1e-9)
            .lambda1;

    ConformalMetric torus = build_flat_torus(16, 16, 1.0, 1.0).metric;
    const double torus_lambda =
        first_nonzero_eigenpair(assemble_stiffness(torus), assemble_mass(torus), 1e-9)
            .lambda1;

    result.seconds = timer.seconds();
    const bool sphere_ok = sphere_lambda >= 1.96 && sphere_lambda <= 2.04;
    const bool torus_ok = torus_lambda >= 38.7 && torus_lambda <= 40.3;
    result.pass = sphere_ok && torus_ok;
    result.detail = fmt("sphere lambda1 = %.6f (target [1.96, 2.04]), torus lambda1 = %.4f "
                        "(target [38.7, 40.3])",
                        sphere_lambda, torus_lambda);
    return result;
}

/// Criterion 4: total area is constant under renormalization and its
/// unrenormalized drift is first order in dt.
CriterionResult criterion_volume_constancy() {
    CriterionResult result{4, true, 0.0, 60.0, ""};
    Stopwatch timer;

    ConformalMetric initial = sphere_scenario_metric();
    const double area0 = total_area(initial);

    FlowConfig config = sphere_scenario_flow();
    config.t_max = 30.0;  // the constancy property is per step; a truncated
                          // window of the scenario exercises it within budget
    FlowTrace trace = run_flow(initial, config);
    double worst_rel = 0.0;
    for (const FlowSample& sample : trace.samples)
        worst_rel = std::max(worst_rel, std::abs(sample.total_area - area0) / area0);

    const CurvatureState state = curvature_state(initial);
    const double max_dev = (state.R.array() - state.r).abs().maxCoeff();
    const double dt = 0.9e-3 / max_dev;
    const AreaEvolutionReport full = area_evolution_check(initial, dt);
    const AreaEvolutionReport half = area_evolution_check(initial, dt / 2.0);
    const double ratio = full.total_area_drift / half.total_area_drift;

    result.seconds = timer.seconds();
    const bool constant_ok = worst_rel <= 1e-10;
    const bool drift_ok = ratio >= 1.7 && ratio <= 2.3;
    result.pass = constant_ok && drift_ok;
    result.detail = fmt("renormalized area deviation %.2e over %zu samples; "
                        "unrenormalized drift halving ratio %.3f",
                        worst_rel, trace.samples.size(), ratio);
    return result;
}

/// Criterion 5: centering and energy/norm identities plus the Rayleigh bound
/// on every sample of the sphere and torus scenario runs.
CriterionResult criterion_proof_identities(const SharedRuns& shared) {
    CriterionResult result{5, true, 0.0, 120.0, ""};
    Stopwatch timer;

    struct Case {
        const char* name;
        const FlowTrace* trace;
        const VerificationReport* report;
    };
    const Case cases[] = {{"sphere", &shared.sphere_trace, &shared.sphere_report},
                          {"torus", &shared.torus_trace, &shared.torus_report}};

    std::ostringstream detail;
    for (const Case& c : cases) {
        const SpectralSolution phi = first_nonzero_eigenpair(
            assemble_stiffness(c.trace->final_metric), assemble_mass(c.trace->final_metric),
            c.trace->config.solver_tol);
        const double f_sup = std::max(phi.phi.lpNorm<Eigen::Infinity>(), 1.0);
        double v_max = 0.0;
        for (const FlowSample& s : c.trace->samples) v_max = std::max(v_max, s.total_area);
        const double centering_budget = 1e-12 * f_sup * v_max;

        const bool ok = c.report->rayleigh_violations == 0 &&
                        c.report->h_centering_max <= centering_budget &&
                        c.report->identity_max_err <= 1e-10;
        if (!ok) result.pass = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << fmt("%s: %zu samples x 21 functions, centering %.1e (budget %.1e), "
                      "identities %.1e, violations %d",
                      c.name, c.trace->samples.size(), c.report->h_centering_max,
                      centering_budget, c.report->identity_max_err,
                      c.report->rayleigh_violations);
    }
    result.seconds = timer.seconds();
    result.detail = detail.str();
    return result;
}

/// Criterion 6: the three scenario verdicts. Also produces the shared runs.
CriterionResult criterion_verdicts(const std::string& fixture_dir, SharedRuns& shared) {
    CriterionResult result{6, true, 0.0, 900.0, ""};
    Stopwatch timer;
    std::ostringstream detail;

    const RunConfig defaults;  // epsilon_rel and window_fraction defaults

    {
        Stopwatch leg;
        shared.sphere_initial = sphere_scenario_metric();
        shared.sphere_trace = run_flow(shared.sphere_initial, sphere_scenario_flow());
        shared.sphere_report = semicontinuity_verdict(shared.sphere_trace,
                                                      defaults.epsilon_rel,
                                                      defaults.window_fraction);
        write_trace_csv(shared.sphere_trace, (shared.dir / "sphere.csv").string());
        write_report_json(shared.sphere_report, shared.sphere_trace,
                          u_sidecar_path("sphere.csv"), (shared.dir / "sphere.json").string());
        const bool ok = shared.sphere_trace.converged &&
                        shared.sphere_report.verdict == Verdict::Pass &&
                        shared.sphere_report.margin >= -shared.sphere_report.epsilon_semi &&
                        leg.seconds() < 300.0;
        if (!ok) result.pass = false;
        detail << fmt("sphere: %s, margin %.1e, %.0f s", ok ? "pass" : "FAIL",
                      shared.sphere_report.margin, leg.seconds());
    }
    {
        Stopwatch leg;
        shared.torus_trace = run_flow(torus_scenario_metric(), torus_scenario_flow());
        shared.torus_report = semicontinuity_verdict(shared.torus_trace, defaults.epsilon_rel,
                                                     defaults.window_fraction);
        const bool ok = shared.torus_trace.converged &&
                        shared.torus_report.verdict == Verdict::Pass &&
                        shared.torus_report.margin >= -shared.torus_report.epsilon_semi &&
                        leg.seconds() < 300.0;
        if (!ok) result.pass = false;
        detail << fmt("; torus: %s, margin %.1e, %.1f s", ok ? "pass" : "FAIL",
                      shared.torus_report.margin, leg.seconds());
    }
    {
        Stopwatch leg;
        shared.genus2_trace = run_flow(genus2_scenario_metric(fixture_dir),
                                       genus2_scenario_flow());
        shared.genus2_report = semicontinuity_verdict(shared.genus2_trace,
                                                      defaults.epsilon_rel,
                                                      defaults.window_fraction);
        const CurvatureState final_state = curvature_state(shared.genus2_trace.final_metric);
        const double final_dev = (final_state.R.array() - final_state.r).abs().maxCoeff();
        const bool ok = shared.genus2_trace.converged &&
                        shared.genus2_report.verdict == Verdict::Pass &&
                        final_state.r < 0.0 &&
                        final_dev <= 1e-6 * (1.0 + std::abs(final_state.r)) &&
                        leg.seconds() < 300.0;
        if (!ok) result.pass = false;
        detail << fmt("; genus-2: %s toward r = %.3f, final deviation %.1e, %.1f s",
                      ok ? "pass" : "FAIL", final_state.r, final_dev, leg.seconds());
    }

    result.seconds = timer.seconds();
    result.detail = detail.str();
    return result;
}

/// Criterion 7: adding a constant to u rescales lambda1 by e^{-2c} and leaves
/// every vertex curvature unchanged.
CriterionResult criterion_scale_covariance() {
    CriterionResult result{7, true, 0.0, 5.0, ""};
    Stopwatch timer;

    auto mesh = std::make_shared<TriMesh>(build_icosphere(2, 1.0));
    ConformalMetric metric = perturb(metric_from_positions(mesh), 0.2, 5);
    const double lambda = first_nonzero_eigenpair(assemble_stiffness(metric),
                                                  assemble_mass(metric), 1e-12)
                              .lambda1;
    const Eigen::VectorXd K = curvature_state(metric).K;

    ConformalMetric scaled = metric;
    scaled.u.array() += 0.5;
    const double lambda_scaled = first_nonzero_eigenpair(assemble_stiffness(scaled),
                                                         assemble_mass(scaled), 1e-12)
                                     .lambda1;
    const Eigen::VectorXd K_scaled = curvature_state(scaled).K;

    const double lambda_rel = std::abs(lambda_scaled - lambda * std::exp(-1.0)) /
                              (lambda * std::exp(-1.0));
    const double k_diff = (K_scaled - K).lpNorm<Eigen::Infinity>();

    result.seconds = timer.seconds();
    result.pass = lambda_rel <= 1e-9 && k_diff <= 1e-12;
    result.detail = fmt("lambda1 ratio off e^{-1} by %.2e relative; max |K_i change| = %.2e",
                        lambda_rel, k_diff);
    return result;
}

/// Criterion 8: the sphere scenario reproduces its artifacts byte for byte.
CriterionResult criterion_determinism(const SharedRuns& shared) {
    CriterionResult result{8, true, 0.0, 600.0, ""};
    Stopwatch timer;

    FlowTrace repeat = run_flow(sphere_scenario_metric(), sphere_scenario_flow());
    const RunConfig defaults;
    VerificationReport report = semicontinuity_verdict(repeat, defaults.epsilon_rel,
                                                       defaults.window_fraction);
    write_trace_csv(repeat, (shared.dir / "sphere_repeat.csv").string());
    write_report_json(report, repeat, u_sidecar_path("sphere.csv"),
                      (shared.dir / "sphere_repeat.json").string());

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    const bool csv_same = slurp(shared.dir / "sphere.csv") ==
                          slurp(shared.dir / "sphere_repeat.csv");
    const bool u_same = slurp(u_sidecar_path((shared.dir / "sphere.csv").string())) ==
                        slurp(u_sidecar_path((shared.dir / "sphere_repeat.csv").string()));
    const bool json_same = slurp(shared.dir / "sphere.json") ==
                           slurp(shared.dir / "sphere_repeat.json");

    result.seconds = timer.seconds();
    result.pass = csv_same && u_same && json_same;
    result.detail = fmt("trace CSV %s, u snapshots %s, report JSON %s",
                        csv_same ? "identical" : "DIFFER", u_same ? "identical" : "DIFFER",
                        json_same ? "identical" : "DIFFER");
    return result;
}

}  // namespace

int main() {
    const std::string fixture_dir = RFLOW_FIXTURE_DIR;
    SharedRuns shared;
    shared.dir = std::filesystem::temp_directory_path() / "rflow_acceptance";
    std::filesystem::create_directories(shared.dir);

    std::vector<CriterionResult> results;
    try {
        results.push_back(criterion_gauss_bonnet());
        results.push_back(criterion_oracle_equivalence(fixture_dir));
        results.push_back(criterion_spectral_anchors());
        results.push_back(criterion_volume_constancy());
        // criterion 6 runs before 5 and 8 so they can reuse its scenario runs
        results.push_back(criterion_verdicts(fixture_dir, shared));
        results.push_back(criterion_proof_identities(shared));
        results.push_back(criterion_scale_covariance());
        results.push_back(criterion_determinism(shared));
    } catch (const std::exception& err) {
        std::printf("[FAIL] acceptance suite aborted: %s\n", err.what());
        return 1;
    }

    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    int failures = 0;
    for (const CriterionResult& r : results) {
        const bool pass = r.pass && r.seconds < r.budget;
        if (!pass) ++failures;
        std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", r.id,
                    r.detail.c_str(), r.seconds);
    }
    return failures;
}
