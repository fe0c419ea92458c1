#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include <rflow/config.hpp>
#include <rflow/conformal.hpp>
#include <rflow/errors.hpp>
#include <rflow/flow.hpp>
#include <rflow/io.hpp>
#include <rflow/mesh.hpp>
#include <rflow/spectral.hpp>
#include <rflow/verify.hpp>

namespace {

using namespace rflow;

/// Exit-code contract: scripts branch on these.
constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;
constexpr int kInconclusive = 3;
constexpr int kNumericalError = 4;

int cmd_mesh_info(const RunConfig& config) {
    ConformalMetric metric = build_initial_metric(config);
    const TriMesh& mesh = *metric.mesh;
    std::printf("V=%d E=%d F=%d chi=%d\n", mesh.vertex_count(), mesh.edge_count(),
                mesh.face_count(), mesh.euler_characteristic());
    std::printf("area=%s\n", format_short(total_area(metric)).c_str());
    return kPass;
}

int cmd_spectrum(const RunConfig& config) {
    ConformalMetric metric = build_initial_metric(config);
    const SpectralSolution eig = first_nonzero_eigenpair(
        assemble_stiffness(metric), assemble_mass(metric), config.flow.solver_tol);
    std::printf("lambda1=%s\n", format_exact(eig.lambda1).c_str());
    std::printf("residual=%s\n", format_exact(eig.residual).c_str());
    std::printf("iterations=%d\n", eig.iterations);
    return kPass;
}

int cmd_flow(const RunConfig& config) {
    if (config.trace_csv_path.empty())
        throw ConfigError("output.trace_csv_path: required by the flow command");
    const FlowTrace trace = run_flow(build_initial_metric(config), flow_config(config));
    write_trace_csv(trace, config.trace_csv_path);
    std::printf("converged=%s aborted=%s t_final=%s samples=%zu lambda_final=%s\n",
                trace.converged ? "true" : "false", trace.aborted ? "true" : "false",
                format_short(trace.t_final).c_str(), trace.samples.size(),
                format_short(trace.samples.back().lambda1).c_str());
    std::printf("trace=%s snapshots=%s\n", config.trace_csv_path.c_str(),
                u_sidecar_path(config.trace_csv_path).c_str());
    if (trace.aborted) {
        std::fprintf(stderr, "flow aborted: %s\n", trace.abort_reason.c_str());
        return kNumericalError;
    }
    return trace.converged ? kPass : kInconclusive;
}

int cmd_verify(const RunConfig& config) {
    if (config.report_json_path.empty())
        throw ConfigError("output.report_json_path: required by the verify command");
    const FlowTrace trace = run_flow(build_initial_metric(config), flow_config(config));

    std::string sidecar;
    if (!config.trace_csv_path.empty()) {
        write_trace_csv(trace, config.trace_csv_path);
        sidecar = u_sidecar_path(config.trace_csv_path);
    }

    const VerificationReport report =
        semicontinuity_verdict(trace, config.epsilon_rel, config.window_fraction);
    write_report_json(report, trace, sidecar, config.report_json_path);

    const char* verdict = report.verdict == Verdict::Pass         ? "pass"
                          : report.verdict == Verdict::Fail       ? "fail"
                                                                  : "inconclusive";
    std::printf("verdict=%s lambda_final=%s tail_limsup=%s margin=%s epsilon=%s\n", verdict,
                format_short(report.lambda_final).c_str(),
                format_short(report.tail_limsup).c_str(), format_short(report.margin).c_str(),
                format_short(report.epsilon_semi).c_str());
    std::printf("rayleigh_violations=%d h_centering_max=%s identity_max_err=%s\n",
                report.rayleigh_violations, format_short(report.h_centering_max).c_str(),
                format_short(report.identity_max_err).c_str());
    std::printf("report=%s\n", config.report_json_path.c_str());

    if (trace.aborted) {
        std::fprintf(stderr, "flow aborted: %s\n", trace.abort_reason.c_str());
        return kNumericalError;
    }
    switch (report.verdict) {
        case Verdict::Pass: return kPass;
        case Verdict::Fail: return kFail;
        case Verdict::Inconclusive: return kInconclusive;
    }
    return kNumericalError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normalized conformal Ricci flow on closed triangulated surfaces: "
                 "integrate the flow, track the first nonzero Laplacian eigenvalue, "
                 "and check its semicontinuity at the limit metric."};
    app.require_subcommand(1);

    std::string config_path;
    auto add_command = [&](const char* name, const char* description) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "path to the JSON run configuration")
            ->required();
        return sub;
    };
    CLI::App* mesh_info =
        add_command("mesh-info", "print V, E, F, Euler characteristic, and total area");
    CLI::App* spectrum =
        add_command("spectrum", "print the first nonzero eigenvalue of the initial metric");
    CLI::App* flow = add_command("flow", "integrate the flow and write the trace CSV");
    add_command("verify", "run the flow, evaluate the semicontinuity verdict, write the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kPass : kConfigError;
    }

    try {
        const RunConfig config = load_config_file(config_path);
        if (mesh_info->parsed()) return cmd_mesh_info(config);
        if (spectrum->parsed()) return cmd_spectrum(config);
        if (flow->parsed()) return cmd_flow(config);
        return cmd_verify(config);
    } catch (const ConfigError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return kConfigError;
    } catch (const MeshError& err) {
        std::fprintf(stderr, "mesh error: %s\n", err.what());
        return kConfigError;
    } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return kConfigError;
    } catch (const std::out_of_range& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return kConfigError;
    } catch (const StepCollapseError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return kNumericalError;
    } catch (const SolverError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return kNumericalError;
    } catch (const GeometryError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return kNumericalError;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kNumericalError;
    }
}
