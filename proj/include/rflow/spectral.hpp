#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rflow/conformal.hpp"

namespace rflow {

/**
 * Cotangent stiffness matrix of a metric. Off-diagonal entry for edge (i, j)
 * is -(cot a + cot b) / 2 over the two angles opposite the edge; the diagonal
 * is the negated row sum of the off-diagonals, so the constant vector lies in
 * the kernel and f' L f is the Dirichlet energy of the piecewise-linear
 * interpolant (positive semidefinite, negative weights kept as-is).
 */
struct StiffnessMatrix {
    Eigen::SparseMatrix<double> matrix;
};

/// Diagonal lumped mass matrix of barycentric vertex areas.
struct MassMatrix {
    Eigen::VectorXd diag;

    double trace() const { return diag.sum(); }
};

/// First nonzero generalized eigenpair of L phi = lambda M phi, with its
/// residual certificate. phi is M-normalized and M-orthogonal to constants.
struct SpectralSolution {
    double lambda1;
    Eigen::VectorXd phi;
    double residual;  ///< ||L phi - lambda M phi|| / (lambda ||M phi||)
    int iterations;
};

StiffnessMatrix assemble_stiffness(const ConformalMetric& metric);

MassMatrix assemble_mass(const ConformalMetric& metric);

/// (f' L f) / (f' M f). Throws std::invalid_argument when f' M f <= 0.
double rayleigh_quotient(const StiffnessMatrix& L, const MassMatrix& M, const Eigen::VectorXd& f);

/**
 * Smallest nonzero generalized eigenvalue of L phi = lambda M phi.
 *
 * Blocked inverse iteration on (L + sigma M)^{-1} M with the constant mode
 * projected out in the M inner product each sweep and a Rayleigh-Ritz step on
 * the block. Deterministic start block; stops when the relative residual
 * meets `tolerance` (must lie in (0, 1e-2]). Throws SolverError with the best
 * residual if the iteration cap is hit.
 */
SpectralSolution first_nonzero_eigenpair(const StiffnessMatrix& L, const MassMatrix& M,
                                         double tolerance);

/// Full generalized spectrum, ascending, by a dense symmetric-definite solve.
/// Oracle for tests; guarded to V <= 2000.
std::vector<double> dense_reference_spectrum(const StiffnessMatrix& L, const MassMatrix& M);

}  // namespace rflow
