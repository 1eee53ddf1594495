#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace merinda {

/// Uniformly sampled multivariate time series: states Y and exogenous
/// inputs U on a shared time grid.
struct Trajectory {
    Eigen::VectorXd times;   // N entries, strictly increasing, uniform step
    Eigen::MatrixXd states;  // N x n
    Eigen::MatrixXd inputs;  // N x m (m may be 0)

    Eigen::Index samples() const { return times.size(); }
    Eigen::Index n_states() const { return states.cols(); }
    Eigen::Index n_inputs() const { return inputs.cols(); }
    double step() const { return times(1) - times(0); }

    /// Checks the uniform-grid and shape invariants; throws on violation.
    void validate() const;
};

struct NoiseSpec {
    enum class Kind { none, gaussian };
    Kind kind = Kind::none;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Gaussian perturbation of states only; times and inputs pass through
/// untouched. kind=none returns the input bit-identically.
Trajectory add_noise(const Trajectory& traj, const NoiseSpec& noise);

/// CSV round trip, header `t,x0..x{n-1},u0..u{m-1}`, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace merinda
