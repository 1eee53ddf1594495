#include "merinda/stlsq.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "merinda/errors.hpp"
#include "merinda/integrate.hpp"

namespace merinda {

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets,
                            double lambda) {
    if (lambda < 0) throw std::invalid_argument("ridge lambda must be >= 0");
    const Eigen::Index p = design.cols();
    Eigen::MatrixXd gram = design.transpose() * design;
    gram.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw RankDeficientError(
            "normal matrix is rank deficient; use lambda > 0 to regularize");
    // A^T is p x n; per-state columns share the factorization
    const Eigen::MatrixXd rhs = design.transpose() * targets;
    Eigen::MatrixXd coeffs_t = llt.solve(rhs);
    // LLT accepts some numerically singular matrices; reject solutions it
    // failed to actually fit at lambda = 0.
    if (lambda == 0.0) {
        const double residual = (gram * coeffs_t - rhs).norm();
        const double scale = std::max(rhs.norm(), 1.0);
        if (!coeffs_t.allFinite() || residual > 1e-6 * scale)
            throw RankDeficientError(
                "normal matrix is rank deficient; use lambda > 0 to regularize");
    }
    (void)p;
    return coeffs_t.transpose();
}

bool StlsqResult::any_empty() const {
    return std::any_of(empty_states.begin(), empty_states.end(), [](bool b) { return b; });
}

StlsqResult stlsq(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets,
                  const PolynomialLibrary& library, const StlsqConfig& config) {
    const Eigen::Index p = design.cols();
    const Eigen::Index n = targets.cols();
    if (p != library.size())
        throw std::invalid_argument("design matrix does not match library size");

    StlsqResult result;
    result.coefficients.library = library;
    result.coefficients.values = Eigen::MatrixXd::Zero(n, p);
    result.empty_states.assign(static_cast<std::size_t>(n), false);

    for (Eigen::Index state = 0; state < n; ++state) {
        std::vector<Eigen::Index> active(p);
        for (Eigen::Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = j;
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(p);
        int sweeps = 0;
        while (sweeps < config.max_sweeps) {
            ++sweeps;
            if (active.empty()) break;
            Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(active.size()));
            for (std::size_t j = 0; j < active.size(); ++j)
                sub.col(static_cast<Eigen::Index>(j)) = design.col(active[j]);
            const Eigen::MatrixXd fit =
                ridge_solve(sub, targets.col(state), config.ridge_lambda);
            coeffs.setZero();
            for (std::size_t j = 0; j < active.size(); ++j)
                coeffs(active[j]) = fit(0, static_cast<Eigen::Index>(j));
            std::vector<Eigen::Index> survivors;
            for (Eigen::Index j : active)
                if (std::abs(coeffs(j)) >= config.threshold) survivors.push_back(j);
            if (survivors.size() == active.size()) break;  // support fixed
            for (Eigen::Index j : active)
                if (std::abs(coeffs(j)) < config.threshold) coeffs(j) = 0.0;
            active.swap(survivors);
        }
        if (active.empty()) {
            coeffs.setZero();
            result.empty_states[static_cast<std::size_t>(state)] = true;
        }
        result.coefficients.values.row(state) = coeffs;
        result.sweeps_used = std::max(result.sweeps_used, sweeps);
    }
    return result;
}

StlsqResult stlsq_recover(const Trajectory& traj, const PolynomialLibrary& library,
                          const StlsqConfig& config) {
    const Eigen::MatrixXd derivatives = finite_difference_derivatives(traj);
    Eigen::MatrixXd points(traj.samples(), traj.n_states() + traj.n_inputs());
    points.leftCols(traj.n_states()) = traj.states;
    if (traj.n_inputs() > 0) points.rightCols(traj.n_inputs()) = traj.inputs;
    if (points.cols() != library.n_vars)
        throw std::invalid_argument("library variable count does not match trajectory");
    const Eigen::MatrixXd design = library.evaluate(points);
    return stlsq(design, derivatives, library, config);
}

ReconstructionError reconstruction_error(const CoefficientMatrix& coeffs,
                                         const Trajectory& traj) {
    ReconstructionError err;
    try {
        const Trajectory reconstructed =
            integrate(rhs_from_coefficients(coeffs, traj.n_states()),
                      traj.states.row(0).transpose(), traj.inputs, traj.step(),
                      traj.samples(), traj.times(0));
        err.mse = (reconstructed.states - traj.states).squaredNorm() /
                  static_cast<double>(traj.states.size());
        if (!std::isfinite(err.mse)) {
            err.mse = 1e12;
            err.diverged = true;
        }
    } catch (const IntegrationDivergedError&) {
        err.mse = 1e12;
        err.diverged = true;
    }
    return err;
}

double coefficient_mse(const CoefficientMatrix& recovered, const CoefficientMatrix& truth) {
    if (recovered.values.rows() != truth.values.rows() ||
        recovered.values.cols() != truth.values.cols())
        throw std::invalid_argument("coefficient matrices have mismatched shapes");
    return (recovered.values - truth.values).squaredNorm() /
           static_cast<double>(truth.values.size());
}

}  // namespace merinda
