#include "rflow/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool lengths_valid(const std::array<double, 3>& l) {
    return l[0] < l[1] + l[2] && l[1] < l[2] + l[0] && l[2] < l[0] + l[1] && l[0] > 0.0 &&
           l[1] > 0.0 && l[2] > 0.0;
}

[[noreturn]] void throw_bad_face(int face, const std::array<double, 3>& l) {
    std::ostringstream msg;
    msg << "triangle inequality violated in face " << face << " (induced lengths " << l[0] << ", "
        << l[1] << ", " << l[2] << ")";
    throw GeometryError(msg.str());
}

/// Lengths of the face's edges indexed so entry c is opposite corner c.
std::array<double, 3> face_lengths(const TriMesh& mesh, const Eigen::VectorXd& induced, int face) {
    const auto& fe = mesh.face_edges(face);
    return {induced[fe[0]], induced[fe[1]], induced[fe[2]]};
}

/// Angle at the corner opposite length a, given the adjacent lengths b and c.
/// The cosine is clamped to [-1, 1] against rounding near degeneracy.
double corner_angle(double a, double b, double c) {
    double cosine = (b * b + c * c - a * a) / (2.0 * b * c);
    return std::acos(std::clamp(cosine, -1.0, 1.0));
}

/// Numerically stable Heron formula (operands ordered largest first).
double triangle_area(std::array<double, 3> l) {
    std::sort(l.begin(), l.end(), std::greater<double>());
    const double a = l[0], b = l[1], c = l[2];
    const double s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    return 0.25 * std::sqrt(std::max(s, 0.0));
}

}  // namespace

Eigen::VectorXd ConformalMetric::induced_lengths() const {
    const auto& edges = mesh->edges();
    Eigen::VectorXd out(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        out[e] = std::exp(0.5 * (u[edges[e].v0] + u[edges[e].v1])) * base_lengths[e];
    return out;
}

ConformalMetric metric_from_lengths(std::shared_ptr<const TriMesh> mesh,
                                    Eigen::VectorXd base_lengths) {
    if (!mesh) throw std::invalid_argument("metric_from_lengths: null mesh");
    if (base_lengths.size() != mesh->edge_count())
        throw std::invalid_argument("metric_from_lengths: length count does not match edge count");
    for (Eigen::Index e = 0; e < base_lengths.size(); ++e)
        if (!(base_lengths[e] > 0.0))
            throw GeometryError("edge " + std::to_string(e) + " has non-positive base length");
    ConformalMetric metric{std::move(mesh), std::move(base_lengths),
                           Eigen::VectorXd::Zero(0)};
    metric.u = Eigen::VectorXd::Zero(metric.mesh->vertex_count());
    return metric;
}

ConformalMetric metric_from_positions(std::shared_ptr<const TriMesh> mesh) {
    if (!mesh) throw std::invalid_argument("metric_from_positions: null mesh");
    const auto& pos = mesh->positions();  // throws MeshError if absent
    Eigen::VectorXd lengths(mesh->edge_count());
    for (int e = 0; e < mesh->edge_count(); ++e) {
        const MeshEdge& edge = mesh->edges()[e];
        lengths[e] = (pos[edge.v0] - pos[edge.v1]).norm();
        if (!(lengths[e] > 0.0))
            throw GeometryError("zero-length edge (" + std::to_string(edge.v0) + ", " +
                                std::to_string(edge.v1) + ")");
    }
    return metric_from_lengths(std::move(mesh), std::move(lengths));
}

FlatTorus build_flat_torus(int m, int n, double width, double height) {
    if (m < 3 || n < 3) throw std::invalid_argument("flat torus requires m, n >= 3");
    if (!(width > 0.0) || !(height > 0.0))
        throw std::invalid_argument("flat torus requires positive width and height");

    const double dx = width / m;
    const double dy = height / n;
    const double diag = std::hypot(dx, dy);
    auto id = [m](int i, int j) { return j * m + i; };

    std::vector<std::array<int, 3>> faces;
    faces.reserve(2 * m * n);
    std::unordered_map<std::uint64_t, double> length_of;
    auto key = [](int a, int b) {
        return (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
               static_cast<std::uint64_t>(std::max(a, b));
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) {
            const int a = id(i, j);
            const int b = id((i + 1) % m, j);
            const int c = id((i + 1) % m, (j + 1) % n);
            const int d = id(i, (j + 1) % n);
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
            length_of[key(a, b)] = dx;
            length_of[key(b, c)] = dy;
            length_of[key(a, c)] = diag;
            length_of[key(c, d)] = dx;
            length_of[key(a, d)] = dy;
        }
    }

    auto mesh = std::make_shared<const TriMesh>(TriMesh::from_faces(m * n, std::move(faces)));
    Eigen::VectorXd base(mesh->edge_count());
    for (int e = 0; e < mesh->edge_count(); ++e) {
        const MeshEdge& edge = mesh->edges()[e];
        base[e] = length_of.at(key(edge.v0, edge.v1));
    }
    ConformalMetric metric = metric_from_lengths(mesh, std::move(base));
    return FlatTorus{std::move(mesh), std::move(metric)};
}

std::array<double, 3> corner_angles(const ConformalMetric& metric, int face) {
    const Eigen::VectorXd induced = metric.induced_lengths();
    const auto l = face_lengths(*metric.mesh, induced, face);
    if (!lengths_valid(l)) throw_bad_face(face, l);
    return {corner_angle(l[0], l[1], l[2]), corner_angle(l[1], l[2], l[0]),
            corner_angle(l[2], l[0], l[1])};
}

Eigen::VectorXd vertex_areas(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();
    Eigen::VectorXd areas = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = face_lengths(mesh, induced, f);
        if (!lengths_valid(l)) throw_bad_face(f, l);
        const double third = triangle_area(l) / 3.0;
        for (int v : mesh.faces()[f]) areas[v] += third;
    }
    return areas;
}

double total_area(const ConformalMetric& metric) { return vertex_areas(metric).sum(); }

CurvatureState curvature_state(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();

    // One pass over the faces: accumulate lumped areas and angle sums
    // together. This sits on the flow's per-step hot path.
    CurvatureState state;
    state.A = Eigen::VectorXd::Zero(mesh.vertex_count());
    Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = face_lengths(mesh, induced, f);
        if (!lengths_valid(l)) throw_bad_face(f, l);
        const auto& fv = mesh.faces()[f];
        const double third = triangle_area(l) / 3.0;
        state.A[fv[0]] += third;
        state.A[fv[1]] += third;
        state.A[fv[2]] += third;
        angle_sum[fv[0]] += corner_angle(l[0], l[1], l[2]);
        angle_sum[fv[1]] += corner_angle(l[1], l[2], l[0]);
        angle_sum[fv[2]] += corner_angle(l[2], l[0], l[1]);
    }
    state.total_area = state.A.sum();
    state.K = (2.0 * kPi) - angle_sum.array();
    state.R = 2.0 * state.K.array() / state.A.array();
    state.r = 4.0 * kPi * mesh.euler_characteristic() / state.total_area;
    return state;
}

ConformalMetric rescale_to_area(const ConformalMetric& metric, double target_area) {
    if (!(target_area > 0.0)) throw std::invalid_argument("target area must be positive");
    const double shift = 0.5 * std::log(target_area / total_area(metric));
    ConformalMetric out = metric;
    out.u.array() += shift;
    return out;
}

ConformalMetric perturb(const ConformalMetric& metric, double amplitude, std::uint64_t seed) {
    if (amplitude < 0.0) throw std::invalid_argument("perturbation amplitude must be >= 0");
    ConformalMetric out = metric;
    if (amplitude == 0.0) return out;

    // Explicit mapping of mt19937_64 output keeps the draw bit-reproducible.
    std::mt19937_64 rng(seed);
    for (Eigen::Index i = 0; i < out.u.size(); ++i) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
        out.u[i] += amplitude * (2.0 * unit - 1.0);
    }
    try {
        validate_triangles(out);
    } catch (const GeometryError& err) {
        throw GeometryError("perturbation of amplitude " + std::to_string(amplitude) +
                            " breaks the metric, lower it: " + err.what());
    }
    return out;
}

void validate_triangles(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = face_lengths(mesh, induced, f);
        if (!lengths_valid(l)) throw_bad_face(f, l);
    }
}

double min_corner_angle(const ConformalMetric& metric) {
    const auto angle = try_min_corner_angle(metric);
    if (!angle) {
        validate_triangles(metric);  // throws with the face named
        throw GeometryError("degenerate metric");
    }
    return *angle;
}

std::optional<double> try_min_corner_angle(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();
    double min_angle = std::numeric_limits<double>::infinity();
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = face_lengths(mesh, induced, f);
        if (!lengths_valid(l)) return std::nullopt;
        min_angle = std::min({min_angle, corner_angle(l[0], l[1], l[2]),
                              corner_angle(l[1], l[2], l[0]), corner_angle(l[2], l[0], l[1])});
    }
    return min_angle;
}

std::optional<MetricMeasurements> try_measure(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();
    double min_angle = std::numeric_limits<double>::infinity();
    // Accumulated per vertex exactly as in vertex_areas, so the total agrees
    // bitwise with the canonical area definition.
    Eigen::VectorXd areas = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = face_lengths(mesh, induced, f);
        if (!lengths_valid(l)) return std::nullopt;
        min_angle = std::min({min_angle, corner_angle(l[0], l[1], l[2]),
                              corner_angle(l[1], l[2], l[0]), corner_angle(l[2], l[0], l[1])});
        const double third = triangle_area(l) / 3.0;
        for (int v : mesh.faces()[f]) areas[v] += third;
    }
    return MetricMeasurements{min_angle, areas.sum()};
}

}  // namespace rflow
