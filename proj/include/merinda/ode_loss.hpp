#pragma once

#include <Eigen/Core>

#include "merinda/library.hpp"
#include "merinda/trajectory.hpp"

namespace merinda {

/// Loss is clipped here when the candidate model diverges on a window.
inline constexpr double kClippedLoss = 1e12;

struct OdeLossValue {
    double loss = 0.0;
    bool diverged = false;
};

/// Integrates ydot = theta * phi([y; u + shift]) from the window's first
/// state over its grid with fixed-step RK4 and returns the MSE against the
/// observed states. theta is n x P over `library` (whose variables are the
/// n states plus, when shifts are present, the input channels).
OdeLossValue ode_loss(const PolynomialLibrary& library, const Eigen::MatrixXd& theta,
                      const Eigen::VectorXd& shifts, const Eigen::MatrixXd& window_states,
                      const Eigen::MatrixXd& window_inputs, double h);

/// Convenience overload taking a CoefficientMatrix and a Trajectory slice.
OdeLossValue ode_loss(const CoefficientMatrix& coeffs, const Eigen::VectorXd& shifts,
                      const Trajectory& window);

/// Same forward pass, plus exact reverse-mode gradients through every RK4
/// stage (discretize-then-optimize). Diverged windows report the clipped
/// loss and zero gradients.
OdeLossValue ode_loss_with_grad(const PolynomialLibrary& library, const Eigen::MatrixXd& theta,
                                const Eigen::VectorXd& shifts,
                                const Eigen::MatrixXd& window_states,
                                const Eigen::MatrixXd& window_inputs, double h,
                                Eigen::MatrixXd& grad_theta, Eigen::VectorXd& grad_shifts);

}  // namespace merinda
