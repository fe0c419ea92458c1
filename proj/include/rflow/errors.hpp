#pragma once

#include <stdexcept>
#include <string>

namespace rflow {

/// A configuration document or argument was rejected before any numerics ran.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A mesh file failed to parse, or the combinatorics failed validation
/// (boundary edge, non-manifold edge, inconsistent orientation, disconnected).
struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A metric left the valid region: some face violates the triangle inequality
/// or degenerates. The message names the offending face.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The eigensolver hit its iteration cap without meeting the residual contract.
struct SolverError : std::runtime_error {
    SolverError(const std::string& what, double best_residual_, int iterations_)
        : std::runtime_error(what), best_residual(best_residual_), iterations(iterations_) {}

    double best_residual;
    int iterations;
};

/// The flow integrator halved the time step past its limit without finding a
/// valid update (step collapse).
struct StepCollapseError : std::runtime_error {
    StepCollapseError(const std::string& what, int face_) : std::runtime_error(what), face(face_) {}

    int face;
};

}  // namespace rflow
