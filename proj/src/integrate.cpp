#include "merinda/integrate.hpp"

#include <cmath>

#include "merinda/errors.hpp"

namespace merinda {

Eigen::VectorXd rk4_step(const VectorField& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double t, double h) {
    const Eigen::VectorXd k1 = f(x, u, t);
    const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, u, t + 0.5 * h);
    const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, u, t + 0.5 * h);
    const Eigen::VectorXd k4 = f(x + h * k3, u, t + h);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const VectorField& f, const Eigen::VectorXd& x0,
                     const Eigen::MatrixXd& inputs, double h, Eigen::Index n_samples,
                     double t0) {
    if (n_samples < 2) throw TooShortError("integrate needs at least 2 samples");
    const Eigen::Index m = inputs.cols();
    Trajectory traj;
    traj.times.resize(n_samples);
    traj.states.resize(n_samples, x0.size());
    traj.inputs.resize(n_samples, m);
    if (m > 0) {
        if (inputs.rows() < n_samples)
            throw TooShortError("input matrix shorter than requested sample count");
        traj.inputs = inputs.topRows(n_samples);
    }

    Eigen::VectorXd x = x0;
    Eigen::VectorXd u(m);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        traj.times(i) = t0 + static_cast<double>(i) * h;
        traj.states.row(i) = x;
        if (i + 1 == n_samples) break;
        if (m > 0) u = traj.inputs.row(i);
        x = rk4_step(f, x, u, traj.times(i), h);
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceGuard)
            throw IntegrationDivergedError(static_cast<std::size_t>(i),
                                           "integration diverged at step " + std::to_string(i));
    }
    return traj;
}

}  // namespace merinda
