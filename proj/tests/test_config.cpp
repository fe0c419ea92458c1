#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <variant>

#include <doctest.h>

#include <rflow/config.hpp>
#include <rflow/conformal.hpp>
#include <rflow/errors.hpp>

#include "support.hpp"

using namespace rflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("minimal config fills every default") {
    RunConfig cfg = parse_config(R"({"mesh": {"icosphere": {"subdivisions": 3, "radius": 1.0}}})");

    const auto& ico = std::get<IcosphereSource>(cfg.mesh);
    CHECK(ico.subdivisions == 3);
    CHECK(ico.radius == 1.0);

    CHECK(!cfg.normalize_area_to.has_value());
    CHECK(cfg.amplitude == 0.0);
    CHECK(cfg.seed == 0);
    CHECK(cfg.flow.dt_init == 1e-3);
    CHECK(cfg.flow.t_max == 10.0);
    CHECK(cfg.flow.sample_every == 10);
    CHECK(cfg.flow.convergence_tol == 1e-6);
    CHECK(cfg.flow.renormalize);
    CHECK(cfg.flow.solver_tol == 1e-9);
    CHECK(cfg.flow.min_angle_floor == 0.01);
    CHECK(cfg.epsilon_rel == 1e-6);
    CHECK(cfg.window_fraction == 0.2);
    CHECK(cfg.trace_csv_path.empty());
    CHECK(cfg.report_json_path.empty());
}

TEST_CASE("every block round-trips its values") {
    RunConfig cfg = parse_config(R"({
        "mesh": {"flat_torus": {"m": 8, "n": 12, "width": 2.0, "height": 0.5}},
        "normalize_area_to": 12.566370614359172,
        "perturb": {"amplitude": 0.3, "seed": 42},
        "flow": {"dt_init": 5e-4, "t_max": 1000.0, "sample_every": 100,
                 "convergence_tol": 1e-7, "renormalize": false,
                 "solver_tol": 1e-8, "min_angle_floor": 0.02},
        "verdict": {"epsilon_rel": 1e-5, "window_fraction": 0.5},
        "output": {"trace_csv_path": "a.csv", "report_json_path": "b.json"}
    })");

    const auto& torus = std::get<FlatTorusSource>(cfg.mesh);
    CHECK(torus.m == 8);
    CHECK(torus.n == 12);
    CHECK(torus.width == 2.0);
    CHECK(torus.height == 0.5);
    CHECK(cfg.normalize_area_to == doctest::Approx(4.0 * kPi).epsilon(1e-15));
    CHECK(cfg.amplitude == 0.3);
    CHECK(cfg.seed == 42);
    CHECK(cfg.flow.dt_init == 5e-4);
    CHECK(cfg.flow.t_max == 1000.0);
    CHECK(cfg.flow.sample_every == 100);
    CHECK(cfg.flow.convergence_tol == 1e-7);
    CHECK(!cfg.flow.renormalize);
    CHECK(cfg.flow.solver_tol == 1e-8);
    CHECK(cfg.flow.min_angle_floor == 0.02);
    CHECK(cfg.epsilon_rel == 1e-5);
    CHECK(cfg.window_fraction == 0.5);
    CHECK(cfg.trace_csv_path == "a.csv");
    CHECK(cfg.report_json_path == "b.json");
}

TEST_CASE("unknown keys are named by their dotted path") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {"subdivs": 3}}})"),
        doctest::Contains("mesh.icosphere.subdivs"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"mesh": {"sphere": {}}})"),
                         doctest::Contains("mesh.sphere"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "outputs": {}})"),
        doctest::Contains("outputs"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "verdict": {"window": 0.3}})"),
        doctest::Contains("verdict.window"), ConfigError);
    // the perturbation lives in the perturb block, not in flow
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "flow": {"amplitude": 0.3}})"),
        doctest::Contains("flow.amplitude"), ConfigError);
}

TEST_CASE("exactly one mesh source") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"mesh": {}})"), doctest::Contains("exactly one"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"mesh": {"icosphere": {"subdivisions": 1}, "file": {"path": "x.off"}}})"),
        doctest::Contains("exactly one"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"flow": {}})"), doctest::Contains("mesh"),
                         ConfigError);
}

TEST_CASE("type mismatches carry their path") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {"subdivisions": 2.5}}})"),
        doctest::Contains("mesh.icosphere.subdivisions"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "flow": {"renormalize": "yes"}})"),
        doctest::Contains("flow.renormalize"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "perturb": {"seed": -4}})"),
        doctest::Contains("perturb.seed"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"file": {"path": 7}}})"),
        doctest::Contains("mesh.file.path"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"mesh": []})"), doctest::Contains("mesh"),
                         ConfigError);
}

TEST_CASE("range violations carry their path") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"flat_torus": {"m": 2}}})"),
        doctest::Contains("mesh.flat_torus.m"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {"radius": 0.0}}})"),
        doctest::Contains("mesh.icosphere.radius"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {"subdivisions": 12}}})"),
        doctest::Contains("subdivisions"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "normalize_area_to": -1.0})"),
        doctest::Contains("normalize_area_to"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "perturb": {"amplitude": -0.1}})"),
        doctest::Contains("perturb.amplitude"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "verdict": {"window_fraction": 0.0}})"),
        doctest::Contains("verdict.window_fraction"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "verdict": {"window_fraction": 1.5}})"),
        doctest::Contains("verdict.window_fraction"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"mesh": {"icosphere": {}}, "flow": {"dt_init": 0.0}})"),
        doctest::Contains("flow"), ConfigError);
}

TEST_CASE("malformed JSON is a config error") {
    CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("not valid JSON"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[1, 2]"), doctest::Contains("object"), ConfigError);
}

TEST_CASE("seed accepts the full unsigned 64-bit range") {
    RunConfig cfg = parse_config(
        R"({"mesh": {"icosphere": {}}, "perturb": {"amplitude": 0.1, "seed": 18446744073709551615}})");
    CHECK(cfg.seed == 18446744073709551615ULL);
}

TEST_CASE("build_initial_metric assembles, rescales, and perturbs") {
    RunConfig cfg = parse_config(R"({
        "mesh": {"icosphere": {"subdivisions": 2, "radius": 1.0}},
        "normalize_area_to": 12.566370614359172,
        "perturb": {"amplitude": 0.2, "seed": 5}
    })");
    ConformalMetric metric = build_initial_metric(cfg);
    CHECK(metric.mesh->vertex_count() == 162);
    // the perturbation moved the area off the normalization target, but the
    // factors stay within the requested band around the rescaled state
    RunConfig unperturbed = cfg;
    unperturbed.amplitude = 0.0;
    ConformalMetric base = build_initial_metric(unperturbed);
    CHECK(total_area(base) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
    CHECK((metric.u - base.u).lpNorm<Eigen::Infinity>() <= 0.2);

    RunConfig torus_cfg = parse_config(
        R"({"mesh": {"flat_torus": {"m": 4, "n": 4, "width": 1.0, "height": 1.0}}})");
    ConformalMetric torus = build_initial_metric(torus_cfg);
    CHECK(curvature_state(torus).K.lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(total_area(torus) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("file mesh source loads OFF data") {
    const std::string path = temp_path("rflow_test_tetra.off");
    {
        std::ofstream out(path);
        out << testutil::tetra_off();
    }
    RunConfig cfg = parse_config(R"({"mesh": {"file": {"path": ")" + path + R"("}}})");
    ConformalMetric metric = build_initial_metric(cfg);
    CHECK(metric.mesh->vertex_count() == 4);
    CHECK(metric.mesh->euler_characteristic() == 2);

    RunConfig missing =
        parse_config(R"({"mesh": {"file": {"path": "/nonexistent/mesh.off"}}})");
    CHECK_THROWS_AS(build_initial_metric(missing), MeshError);
}

TEST_CASE("flow_config carries the perturbation provenance") {
    RunConfig cfg = parse_config(R"({
        "mesh": {"icosphere": {}},
        "perturb": {"amplitude": 0.25, "seed": 11},
        "flow": {"dt_init": 2e-3}
    })");
    FlowConfig flow = flow_config(cfg);
    CHECK(flow.dt_init == 2e-3);
    CHECK(flow.amplitude == 0.25);
    CHECK(flow.seed == 11);
}

TEST_CASE("load_config_file reads and parses") {
    const std::string path = temp_path("rflow_test_config.json");
    {
        std::ofstream out(path);
        out << R"({"mesh": {"icosphere": {"subdivisions": 1}}})";
    }
    RunConfig cfg = load_config_file(path);
    CHECK(std::get<IcosphereSource>(cfg.mesh).subdivisions == 1);
    CHECK_THROWS_WITH_AS(load_config_file("/nonexistent/config.json"),
                         doctest::Contains("cannot open"), ConfigError);
}
