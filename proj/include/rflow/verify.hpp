#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rflow/flow.hpp"
#include "rflow/spectral.hpp"

namespace rflow {

/// Integral of f against the vertex measure: 1' M f = sum_i f_i A_i.
double weighted_mean(const Eigen::VectorXd& f, const MassMatrix& mass);

/**
 * Mean-zero centering h = f - (c/V) 1 of a test function, together with the
 * certificates the verdict machinery relies on. Subtracting the weighted
 * mean leaves the Dirichlet energy untouched (constants lie in the stiffness
 * kernel) and lowers the mass norm by exactly c^2/V; both identities are
 * evaluated here so a caller can assert them instead of trusting them.
 */
struct CenteredFunction {
    Eigen::VectorXd h;
    double c;                    ///< weighted mean of f
    double centering;            ///< |1' M h| left after centering
    double energy_identity_err;  ///< relative error of h'Lh = f'Lf
    double norm_identity_err;    ///< relative error of h'Mh = f'Mf - c^2/V
};

/// Requires volume > 0; volume should be the total mass 1'M1 for the
/// centering guarantee to be exact.
CenteredFunction centered_test_function(const Eigen::VectorXd& f, const StiffnessMatrix& stiffness,
                                        const MassMatrix& mass, double volume);

/// One time sample of the Rayleigh comparison for a fixed test function.
struct RayleighRow {
    double t;
    double lambda1;  ///< the trace sample's eigenvalue
    double bound;    ///< f'L_t f / (f'M_t f - c_t^2 / V_t), an upper bound on lambda1(t)
    double c;        ///< weighted mean of f at this sample
};

struct RayleighSeries {
    std::vector<RayleighRow> rows;
    int violations = 0;            ///< rows with lambda1 > bound + 1e-9 * lambda1
    double h_centering_max = 0.0;  ///< worst |1'M_t h_t| across rows
    double identity_max_err = 0.0; ///< worst relative error of the two centering identities
};

/**
 * Evaluates the variational upper bound on lambda1 at every sample of the
 * trace, rebuilding the operators from each u snapshot. f must be mean-zero
 * against the final sample's mass matrix (within 1e-8 * sup|f| * V) and not
 * numerically constant; a nonpositive denominator f'M_t f - c_t^2/V_t
 * reports the latter. Violations are counted, not thrown: a sound run has
 * zero.
 */
RayleighSeries rayleigh_bound_series(const FlowTrace& trace, const Eigen::VectorXd& f);

/// Max of lambda1 over the last max(5, ceil(window_fraction * N)) samples
/// (all of them if fewer exist). Requires 0 < window_fraction <= 1 and a
/// nonempty trace. The finite surrogate for limsup_{t -> T} lambda1(t).
double tail_limsup(const FlowTrace& trace, double window_fraction);

enum class Verdict { Pass, Fail, Inconclusive };

/// Outcome of the semicontinuity check together with every intermediate
/// quantity a reader needs to audit it.
struct VerificationReport {
    double lambda_final = 0.0;   ///< eigenvalue of the last sample
    double tail_limsup = 0.0;
    double margin = 0.0;         ///< lambda_final - tail_limsup
    double epsilon_semi = 0.0;   ///< tolerance the verdict compared margin against
    Verdict verdict = Verdict::Inconclusive;
    bool semicontinuity_pass = false;
    int rayleigh_violations = 0;       ///< over all (sample, test function) pairs
    std::vector<std::pair<double, double>> c_series;  ///< (t, c_t) for the default f
    double h_centering_max = 0.0;
    double identity_max_err = 0.0;
};

/**
 * Verdict on lambda_final >= tail_limsup - epsilon_semi, with
 * epsilon_semi = epsilon_rel * lambda_final + 2 * solver_tol * lambda_final
 * (both the final and the tail eigenvalues carry solver error, hence the
 * factor 2). The bound series runs with the final eigenvector as default
 * test function plus 20 seeded random mean-zero functions; their violation
 * counts and certificate maxima are aggregated into the report. An
 * unconverged or aborted trace yields Inconclusive, never Fail.
 */
VerificationReport semicontinuity_verdict(const FlowTrace& trace, double epsilon_rel,
                                          double window_fraction);

/// Metric of sample `sample_index`: the trace's combinatorics and base
/// lengths under that sample's conformal factors.
ConformalMetric metric_at(const FlowTrace& trace, std::size_t sample_index);

}  // namespace rflow
