#pragma once

// Shared fixtures and helpers for the unit tests.

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "rflow/conformal.hpp"
#include "rflow/mesh.hpp"

namespace rflow::testutil {

/// Regular tetrahedron with unit edge length, centered at the origin.
inline std::string tetra_off() {
    return "OFF\n"
           "4 4 0\n"
           "0.35355339059327373 0.35355339059327373 0.35355339059327373\n"
           "0.35355339059327373 -0.35355339059327373 -0.35355339059327373\n"
           "-0.35355339059327373 0.35355339059327373 -0.35355339059327373\n"
           "-0.35355339059327373 -0.35355339059327373 0.35355339059327373\n"
           "3 0 1 2\n"
           "3 0 2 3\n"
           "3 0 3 1\n"
           "3 1 3 2\n";
}

inline std::shared_ptr<const TriMesh> tetra_mesh() {
    return std::make_shared<TriMesh>(load_off(tetra_off()));
}

inline ConformalMetric tetra_metric() { return metric_from_positions(tetra_mesh()); }

/// Two copies of one triangle glued along all three edges: the smallest closed
/// surface (V=3, E=3, F=2, a sphere). Handy for exact-length fixtures.
/// Lengths are given for edges (0,1), (0,2), (1,2) in that order.
inline ConformalMetric doubled_triangle(double l01, double l02, double l12) {
    auto mesh = std::make_shared<TriMesh>(
        TriMesh::from_faces(3, {{0, 1, 2}, {0, 2, 1}}));
    Eigen::VectorXd lengths(3);
    lengths << l01, l02, l12;
    return metric_from_lengths(std::move(mesh), std::move(lengths));
}

/// Deterministic uniform vector in [-1, 1]^n.
inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
    std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ULL;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        // splitmix64, then map the top 53 bits into [0, 1)
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        v[i] = 2.0 * ((z >> 11) * 0x1.0p-53) - 1.0;
    }
    return v;
}

}  // namespace rflow::testutil
