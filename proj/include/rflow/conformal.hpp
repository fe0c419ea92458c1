#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>

#include <Eigen/Core>

#include "rflow/mesh.hpp"

namespace rflow {

/**
 * A discrete conformal metric: per-vertex log scale factors u over per-edge
 * base lengths, on a shared immutable mesh. The induced length of edge (i, j)
 * is exp((u_i + u_j) / 2) * base length, so adding a constant c to every u_i
 * multiplies every induced length by e^c exactly.
 */
struct ConformalMetric {
    std::shared_ptr<const TriMesh> mesh;
    Eigen::VectorXd base_lengths;  ///< per edge, in mesh edge order; strictly positive
    Eigen::VectorXd u;             ///< per vertex, dimensionless

    double induced_length(int edge) const {
        const MeshEdge& e = mesh->edges()[edge];
        return std::exp(0.5 * (u[e.v0] + u[e.v1])) * base_lengths[edge];
    }

    /// All induced edge lengths, in mesh edge order.
    Eigen::VectorXd induced_lengths() const;
};

/// Angle defects, vertex areas, and curvature of a metric: the per-vertex
/// integrated and pointwise scalar curvature together with its average.
struct CurvatureState {
    Eigen::VectorXd K;   ///< angle defect 2*pi - sum of incident corner angles (radians)
    Eigen::VectorXd A;   ///< barycentric lumped vertex area (1/3 of incident face areas)
    double total_area;   ///< sum of A entries
    Eigen::VectorXd R;   ///< pointwise scalar curvature 2 * K_i / A_i
    double r;            ///< average scalar curvature 4 * pi * chi / total_area
};

/// Metric with base lengths taken from embedded positions and u = 0.
/// Throws MeshError if positions are missing, GeometryError on a zero-length edge.
ConformalMetric metric_from_positions(std::shared_ptr<const TriMesh> mesh);

/// Metric with explicitly given base lengths and u = 0.
ConformalMetric metric_from_lengths(std::shared_ptr<const TriMesh> mesh,
                                    Eigen::VectorXd base_lengths);

/// m x n grid on [0, width] x [0, height] with opposite sides identified and
/// each cell split by one diagonal; base lengths are the intrinsic flat ones
/// (no positions). Requires m, n >= 3.
struct FlatTorus {
    std::shared_ptr<const TriMesh> mesh;
    ConformalMetric metric;
};
FlatTorus build_flat_torus(int m, int n, double width, double height);

/// Law-of-cosines corner angles of one face under the induced lengths, in
/// face-corner order. The three sum to pi. Throws GeometryError (naming the
/// face) if the induced lengths violate the strict triangle inequality.
std::array<double, 3> corner_angles(const ConformalMetric& metric, int face);

/// Barycentric lumped vertex areas under the induced lengths.
Eigen::VectorXd vertex_areas(const ConformalMetric& metric);

/// Sum of the lumped vertex areas (the canonical total area).
double total_area(const ConformalMetric& metric);

/// Full curvature state of the metric.
CurvatureState curvature_state(const ConformalMetric& metric);

/// Shifts every u_i by the constant that makes the total area equal
/// target_area (an exact homothety of the induced metric).
ConformalMetric rescale_to_area(const ConformalMetric& metric, double target_area);

/// Adds a seeded uniform perturbation in [-amplitude, amplitude] to every u_i.
/// Deterministic: the same seed yields the same metric. Throws GeometryError
/// if the perturbed metric violates a triangle inequality.
ConformalMetric perturb(const ConformalMetric& metric, double amplitude, std::uint64_t seed);

/// Throws GeometryError naming the first face whose induced lengths violate
/// the strict triangle inequality.
void validate_triangles(const ConformalMetric& metric);

/// Smallest corner angle over all faces.
double min_corner_angle(const ConformalMetric& metric);

/// Smallest corner angle, or nullopt if some face violates the triangle
/// inequality. Never throws; used by the flow's step guard.
std::optional<double> try_min_corner_angle(const ConformalMetric& metric);

/// Smallest corner angle and total area in a single pass, or nullopt if some
/// face violates the triangle inequality. The flow vets and renormalizes each
/// candidate step from this without re-walking the mesh.
struct MetricMeasurements {
    double min_corner_angle;
    double total_area;
};
std::optional<MetricMeasurements> try_measure(const ConformalMetric& metric);

}  // namespace rflow
