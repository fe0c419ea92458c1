#include "rflow/config.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "rflow/errors.hpp"
#include "rflow/mesh.hpp"

namespace rflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path.empty() ? what : path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

/// Every key of obj must appear in `allowed`: silent typos would otherwise
/// fall back to defaults and quietly change the run.
void require_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(join(path, it.key()), "unknown key");
    }
}

const json& require_object(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    return obj;
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& value = obj.at(key);
    if (!value.is_number()) fail(join(path, key), "expected a number");
    return value.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& value = obj.at(key);
    if (!value.is_number_integer()) fail(join(path, key), "expected an integer");
    return value.get<int>();
}

std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& value = obj.at(key);
    if (!value.is_number_unsigned() && !value.is_number_integer())
        fail(join(path, key), "expected a nonnegative integer");
    if (value.is_number_integer() && !value.is_number_unsigned() && value.get<long long>() < 0)
        fail(join(path, key), "expected a nonnegative integer");
    return value.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& value = obj.at(key);
    if (!value.is_boolean()) fail(join(path, key), "expected a boolean");
    return value.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& value = obj.at(key);
    if (!value.is_string()) fail(join(path, key), "expected a string");
    return value.get<std::string>();
}

MeshSource parse_mesh(const json& doc) {
    if (!doc.contains("mesh")) fail("mesh", "required");
    const json& mesh = require_object(doc.at("mesh"), "mesh");
    require_keys(mesh, "mesh", {"icosphere", "flat_torus", "file"});

    const int sources = static_cast<int>(mesh.contains("icosphere")) +
                        static_cast<int>(mesh.contains("flat_torus")) +
                        static_cast<int>(mesh.contains("file"));
    if (sources != 1)
        fail("mesh", "exactly one of icosphere, flat_torus, file must be present (found " +
                         std::to_string(sources) + ")");

    if (mesh.contains("icosphere")) {
        const json& block = require_object(mesh.at("icosphere"), "mesh.icosphere");
        require_keys(block, "mesh.icosphere", {"subdivisions", "radius"});
        IcosphereSource source;
        source.subdivisions = get_int(block, "mesh.icosphere", "subdivisions", 0);
        source.radius = get_number(block, "mesh.icosphere", "radius", 1.0);
        if (source.subdivisions < 0 || source.subdivisions > 9)
            fail("mesh.icosphere.subdivisions", "must lie in [0, 9]");
        if (!(source.radius > 0.0)) fail("mesh.icosphere.radius", "must be positive");
        return source;
    }
    if (mesh.contains("flat_torus")) {
        const json& block = require_object(mesh.at("flat_torus"), "mesh.flat_torus");
        require_keys(block, "mesh.flat_torus", {"m", "n", "width", "height"});
        FlatTorusSource source;
        source.m = get_int(block, "mesh.flat_torus", "m", 4);
        source.n = get_int(block, "mesh.flat_torus", "n", 4);
        source.width = get_number(block, "mesh.flat_torus", "width", 1.0);
        source.height = get_number(block, "mesh.flat_torus", "height", 1.0);
        if (source.m < 3) fail("mesh.flat_torus.m", "must be at least 3");
        if (source.n < 3) fail("mesh.flat_torus.n", "must be at least 3");
        if (!(source.width > 0.0)) fail("mesh.flat_torus.width", "must be positive");
        if (!(source.height > 0.0)) fail("mesh.flat_torus.height", "must be positive");
        return source;
    }
    const json& block = require_object(mesh.at("file"), "mesh.file");
    require_keys(block, "mesh.file", {"path"});
    FileSource source;
    source.path = get_string(block, "mesh.file", "path", "");
    if (source.path.empty()) fail("mesh.file.path", "must be a nonempty string");
    return source;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    require_object(doc, "config");
    require_keys(doc, "", {"mesh", "normalize_area_to", "perturb", "flow", "verdict", "output"});

    RunConfig config;
    config.mesh = parse_mesh(doc);

    if (doc.contains("normalize_area_to")) {
        const json& value = doc.at("normalize_area_to");
        if (!value.is_number()) fail("normalize_area_to", "expected a number");
        config.normalize_area_to = value.get<double>();
        if (!(*config.normalize_area_to > 0.0)) fail("normalize_area_to", "must be positive");
    }

    if (doc.contains("perturb")) {
        const json& block = require_object(doc.at("perturb"), "perturb");
        require_keys(block, "perturb", {"amplitude", "seed"});
        config.amplitude = get_number(block, "perturb", "amplitude", 0.0);
        config.seed = get_seed(block, "perturb", "seed", 0);
        if (!(config.amplitude >= 0.0)) fail("perturb.amplitude", "must be nonnegative");
    }

    if (doc.contains("flow")) {
        const json& block = require_object(doc.at("flow"), "flow");
        require_keys(block, "flow",
                     {"dt_init", "t_max", "sample_every", "convergence_tol", "renormalize",
                      "solver_tol", "min_angle_floor"});
        config.flow.dt_init = get_number(block, "flow", "dt_init", config.flow.dt_init);
        config.flow.t_max = get_number(block, "flow", "t_max", config.flow.t_max);
        config.flow.sample_every = get_int(block, "flow", "sample_every", config.flow.sample_every);
        config.flow.convergence_tol =
            get_number(block, "flow", "convergence_tol", config.flow.convergence_tol);
        config.flow.renormalize = get_bool(block, "flow", "renormalize", config.flow.renormalize);
        config.flow.solver_tol = get_number(block, "flow", "solver_tol", config.flow.solver_tol);
        config.flow.min_angle_floor =
            get_number(block, "flow", "min_angle_floor", config.flow.min_angle_floor);
        try {
            config.flow.validate();
        } catch (const std::invalid_argument& err) {
            fail("flow", err.what());
        }
    }

    if (doc.contains("verdict")) {
        const json& block = require_object(doc.at("verdict"), "verdict");
        require_keys(block, "verdict", {"epsilon_rel", "window_fraction"});
        config.epsilon_rel = get_number(block, "verdict", "epsilon_rel", config.epsilon_rel);
        config.window_fraction =
            get_number(block, "verdict", "window_fraction", config.window_fraction);
        if (!(config.epsilon_rel >= 0.0)) fail("verdict.epsilon_rel", "must be nonnegative");
        if (!(config.window_fraction > 0.0) || config.window_fraction > 1.0)
            fail("verdict.window_fraction", "must lie in (0, 1]");
    }

    if (doc.contains("output")) {
        const json& block = require_object(doc.at("output"), "output");
        require_keys(block, "output", {"trace_csv_path", "report_json_path"});
        config.trace_csv_path = get_string(block, "output", "trace_csv_path", "");
        config.report_json_path = get_string(block, "output", "report_json_path", "");
    }

    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

ConformalMetric build_initial_metric(const RunConfig& config) {
    ConformalMetric metric;
    if (const auto* ico = std::get_if<IcosphereSource>(&config.mesh)) {
        auto mesh = std::make_shared<TriMesh>(build_icosphere(ico->subdivisions, ico->radius));
        metric = metric_from_positions(std::move(mesh));
    } else if (const auto* torus = std::get_if<FlatTorusSource>(&config.mesh)) {
        metric = build_flat_torus(torus->m, torus->n, torus->width, torus->height).metric;
    } else {
        const auto& file = std::get<FileSource>(config.mesh);
        auto mesh = std::make_shared<TriMesh>(load_off_file(file.path));
        metric = metric_from_positions(std::move(mesh));
    }

    if (config.normalize_area_to) metric = rescale_to_area(metric, *config.normalize_area_to);
    if (config.amplitude > 0.0) metric = perturb(metric, config.amplitude, config.seed);
    return metric;
}

FlowConfig flow_config(const RunConfig& config) {
    FlowConfig flow = config.flow;
    flow.amplitude = config.amplitude;
    flow.seed = config.seed;
    return flow;
}

}  // namespace rflow
