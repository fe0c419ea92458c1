#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "rflow/conformal.hpp"
#include "rflow/flow.hpp"

namespace rflow {

struct IcosphereSource {
    int subdivisions = 0;
    double radius = 1.0;
};

struct FlatTorusSource {
    int m = 4;
    int n = 4;
    double width = 1.0;
    double height = 1.0;
};

struct FileSource {
    std::string path;
};

using MeshSource = std::variant<IcosphereSource, FlatTorusSource, FileSource>;

/**
 * Everything one run needs, parsed from a single JSON document. The flow
 * block mirrors FlowConfig; the perturb block is applied to the initial
 * metric and echoed into the FlowConfig provenance fields.
 */
struct RunConfig {
    MeshSource mesh;
    std::optional<double> normalize_area_to;
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    FlowConfig flow;
    double epsilon_rel = 1e-6;
    double window_fraction = 0.2;
    std::string trace_csv_path;
    std::string report_json_path;
};

/**
 * Strict parse: unknown keys are an error naming their dotted path, exactly
 * one mesh source must be present, and every value is range-checked. Throws
 * ConfigError with the offending path in the message.
 */
RunConfig parse_config(const std::string& text);

/// Reads the file and parses it. Throws ConfigError when unreadable.
RunConfig load_config_file(const std::string& path);

/// Initial metric of the run: mesh built or loaded per the source, rescaled
/// when normalize_area_to is set, then perturbed when amplitude > 0.
ConformalMetric build_initial_metric(const RunConfig& config);

/// The run's FlowConfig with the perturbation provenance filled in.
FlowConfig flow_config(const RunConfig& config);

}  // namespace rflow
