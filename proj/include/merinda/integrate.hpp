#pragma once

#include <Eigen/Core>
#include <functional>

#include "merinda/trajectory.hpp"

namespace merinda {

/// Right-hand side f(x, u, t) of an ODE with exogenous input u.
using VectorField = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;

/// Any state component exceeding this magnitude aborts integration.
inline constexpr double kDivergenceGuard = 1e12;

/// One classical fourth-order Runge-Kutta step. The input u is held
/// constant across the four stages (zero-order hold).
Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double t, double h);

/// Integrates the field from x0 for N samples at fixed step h. Row i of
/// `inputs` is held over step i (zero-order hold); pass a 0-column matrix
/// for autonomous systems. Throws IntegrationDivergedError when the guard
/// trips.
Trajectory integrate(const VectorField& f, const Eigen::VectorXd& x0,
                     const Eigen::MatrixXd& inputs, double h, Eigen::Index n_samples,
                     double t0 = 0.0);

}  // namespace merinda
