#pragma once

#include <Eigen/Core>
#include <vector>

#include "merinda/library.hpp"
#include "merinda/trajectory.hpp"

namespace merinda {

struct StlsqConfig {
    double ridge_lambda = 1e-5;
    double threshold = 0.1;
    int max_sweeps = 10;
};

/// Minimizes ||design * A^T - targets||^2 + lambda ||A||_F^2 column by
/// column via normal equations (LLT). lambda = 0 on a singular normal
/// matrix throws RankDeficientError.
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets,
                            double lambda);

struct StlsqResult {
    CoefficientMatrix coefficients;
    int sweeps_used = 0;
    // true for each state whose row was thresholded to all zeros
    std::vector<bool> empty_states;
    bool any_empty() const;
};

/// Sequentially thresholded least squares over the library: ridge fit on
/// the active support, zero entries below the (absolute) threshold, refit
/// on survivors, until the support is stable or max_sweeps.
StlsqResult stlsq(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets,
                  const PolynomialLibrary& library, const StlsqConfig& config);

/// Finite-difference derivative targets + library design matrix over the
/// trajectory, then stlsq. Inputs are appended as library variables when
/// the library expects them.
StlsqResult stlsq_recover(const Trajectory& traj, const PolynomialLibrary& library,
                          const StlsqConfig& config);

struct ReconstructionError {
    double mse = 0.0;
    bool diverged = false;
};

/// Integrates the recovered model from the trajectory's initial state
/// over its time grid; MSE over all states and samples. Divergence is
/// clipped to 1e12 with the flag set.
ReconstructionError reconstruction_error(const CoefficientMatrix& coeffs,
                                         const Trajectory& traj);

/// Mean squared difference between two coefficient matrices over the same
/// library (entrywise, all states and terms).
double coefficient_mse(const CoefficientMatrix& recovered, const CoefficientMatrix& truth);

}  // namespace merinda
