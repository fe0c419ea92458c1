#include "rflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

bool lengths_valid(double a, double b, double c) {
    return a < b + c && b < c + a && c < a + b && a > 0.0 && b > 0.0 && c > 0.0;
}

double heron_area(double a, double b, double c) {
    double l[3] = {a, b, c};
    std::sort(l, l + 3, std::greater<double>());
    const double s =
        (l[0] + (l[1] + l[2])) * (l[2] - (l[0] - l[1])) * (l[2] + (l[0] - l[1])) * (l[0] + (l[1] - l[2]));
    return 0.25 * std::sqrt(std::max(s, 0.0));
}

}  // namespace

StiffnessMatrix assemble_stiffness(const ConformalMetric& metric) {
    const TriMesh& mesh = *metric.mesh;
    const Eigen::VectorXd induced = metric.induced_lengths();

    // Accumulate per-edge cotangent weights face by face; cot of the angle
    // opposite length a is (b^2 + c^2 - a^2) / (4 * area).
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.edge_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& fe = mesh.face_edges(f);
        const double a = induced[fe[0]], b = induced[fe[1]], c = induced[fe[2]];
        if (!lengths_valid(a, b, c))
            throw GeometryError("triangle inequality violated in face " + std::to_string(f));
        const double quad_area = 4.0 * heron_area(a, b, c);
        weight[fe[0]] += 0.5 * (b * b + c * c - a * a) / quad_area;
        weight[fe[1]] += 0.5 * (c * c + a * a - b * b) / quad_area;
        weight[fe[2]] += 0.5 * (a * a + b * b - c * c) / quad_area;
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.edge_count() * 4);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        triplets.emplace_back(edge.v0, edge.v1, -weight[e]);
        triplets.emplace_back(edge.v1, edge.v0, -weight[e]);
        triplets.emplace_back(edge.v0, edge.v0, weight[e]);
        triplets.emplace_back(edge.v1, edge.v1, weight[e]);
    }
    StiffnessMatrix L;
    L.matrix.resize(mesh.vertex_count(), mesh.vertex_count());
    L.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return L;
}

MassMatrix assemble_mass(const ConformalMetric& metric) { return MassMatrix{vertex_areas(metric)}; }

double rayleigh_quotient(const StiffnessMatrix& L, const MassMatrix& M, const Eigen::VectorXd& f) {
    const double denominator = f.dot(M.diag.cwiseProduct(f));
    if (!(denominator > 0.0))
        throw std::invalid_argument("rayleigh_quotient: f has zero M-norm");
    return f.dot(L.matrix * f) / denominator;
}

namespace {

double m_dot(const MassMatrix& M, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.dot(M.diag.cwiseProduct(y));
}

/// Removes the M-component along the (M-normalized) constant mode.
void deflate_constant(const MassMatrix& M, const Eigen::VectorXd& unit_const, Eigen::VectorXd& x) {
    x -= unit_const * m_dot(M, unit_const, x);
}

}  // namespace

SpectralSolution first_nonzero_eigenpair(const StiffnessMatrix& L, const MassMatrix& M,
                                         double tolerance) {
    if (!(tolerance > 0.0) || tolerance > 1e-2)
        throw std::invalid_argument("eigensolver tolerance must lie in (0, 1e-2]");
    const Eigen::Index n = L.matrix.rows();
    if (n < 2) throw std::invalid_argument("eigenproblem needs at least two vertices");

    const int block = static_cast<int>(std::min<Eigen::Index>(8, n - 1));
    const int max_iterations = 500;

    // Shift keeps L + sigma M positive definite; small against the spectral
    // radius so the inverse strongly favors the low end.
    const double scale = L.matrix.diagonal().sum() / M.diag.sum();
    double sigma = 1e-3 * scale;

    Eigen::SparseMatrix<double> shifted = L.matrix;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization;
    for (int attempt = 0;; ++attempt) {
        shifted = L.matrix;
        for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma * M.diag[i];
        factorization.compute(shifted);
        if (factorization.info() == Eigen::Success) break;
        if (attempt >= 4)
            throw SolverError("failed to factorize shifted stiffness matrix", -1.0, 0);
        sigma *= 10.0;
    }

    Eigen::VectorXd unit_const = Eigen::VectorXd::Ones(n) / std::sqrt(M.diag.sum());

    // Deterministic start block.
    std::mt19937_64 rng(0x5eedf00dULL);
    auto random_unit = [&rng](Eigen::Index size) {
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i)
            v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
        return v;
    };
    Eigen::MatrixXd X(n, block);
    for (int j = 0; j < block; ++j) X.col(j) = random_unit(n);

    auto orthonormalize = [&](Eigen::MatrixXd& B) {
        for (int j = 0; j < block; ++j) {
            Eigen::VectorXd v = B.col(j);
            deflate_constant(M, unit_const, v);
            for (int k = 0; k < j; ++k) v -= B.col(k) * m_dot(M, B.col(k), v);
            double norm = std::sqrt(std::max(m_dot(M, v, v), 0.0));
            if (norm < 1e-14) {  // degenerate column; replace and redo this slot
                v = random_unit(B.rows());
                deflate_constant(M, unit_const, v);
                for (int k = 0; k < j; ++k) v -= B.col(k) * m_dot(M, B.col(k), v);
                norm = std::sqrt(std::max(m_dot(M, v, v), 0.0));
            }
            B.col(j) = v / norm;
        }
    };
    orthonormalize(X);

    double best_residual = std::numeric_limits<double>::infinity();
    for (int iteration = 1; iteration <= max_iterations; ++iteration) {
        Eigen::MatrixXd Y(n, block);
        for (int j = 0; j < block; ++j)
            Y.col(j) = factorization.solve(M.diag.cwiseProduct(X.col(j)));
        orthonormalize(Y);

        // Rayleigh-Ritz on the M-orthonormal block.
        Eigen::MatrixXd small = Y.transpose() * (L.matrix * Y);
        small = 0.5 * (small + small.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(small);
        X = Y * ritz.eigenvectors();

        const double lambda = ritz.eigenvalues()[0];
        const Eigen::VectorXd phi = X.col(0);
        const Eigen::VectorXd m_phi = M.diag.cwiseProduct(phi);
        const double residual = (L.matrix * phi - lambda * m_phi).norm() /
                                (std::abs(lambda) * m_phi.norm());
        best_residual = std::min(best_residual, residual);
        if (residual <= tolerance) {
            if (!(lambda > 0.0))
                throw SolverError("first nonzero eigenvalue came out non-positive", residual,
                                  iteration);
            return SpectralSolution{lambda, phi, residual, iteration};
        }
    }
    throw SolverError("eigensolver did not converge in " + std::to_string(max_iterations) +
                          " iterations (best residual " + std::to_string(best_residual) + ")",
                      best_residual, max_iterations);
}

std::vector<double> dense_reference_spectrum(const StiffnessMatrix& L, const MassMatrix& M) {
    const Eigen::Index n = L.matrix.rows();
    if (n > 2000)
        throw std::invalid_argument("dense_reference_spectrum is guarded to V <= 2000 vertices");
    Eigen::MatrixXd dense_L(L.matrix);
    Eigen::MatrixXd dense_M = M.diag.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_L, dense_M,
                                                                     Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw SolverError("dense generalized eigensolver failed", -1.0, 0);
    const Eigen::VectorXd values = solver.eigenvalues();
    return std::vector<double>(values.data(), values.data() + values.size());
}

}  // namespace rflow
