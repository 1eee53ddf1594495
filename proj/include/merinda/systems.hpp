#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "merinda/library.hpp"
#include "merinda/trajectory.hpp"

namespace merinda {

/// Default forcing signal for systems with exogenous inputs, sampled with
/// zero-order hold at the trajectory grid.
using InputSignal = std::function<Eigen::VectorXd(double t)>;

struct SimDefaults {
    double h = 0.01;
    Eigen::Index steps = 1000;
    Eigen::VectorXd x0;
};

/// A catalog benchmark system: ground-truth coefficient matrix over the
/// canonical polynomial library (inputs appended as extra library
/// variables when n_inputs > 0), plus the complexity annotation
/// (nonlinear term count, polynomial order, state count).
struct SystemSpec {
    std::string name;
    int n_states = 0;
    int n_inputs = 0;
    int library_order = 0;
    int nonlinear_term_count = 0;
    CoefficientMatrix true_coefficients;
    SimDefaults sim;
    InputSignal input_signal;  // null when n_inputs == 0

    VectorField field() const { return rhs_from_coefficients(true_coefficients, n_states); }
};

std::vector<std::string> catalog_names();

/// name in {aid, lotka, lorenz, pathogenic, f8}; throws UnknownSystemError
/// (listing valid names) otherwise.
SystemSpec catalog_system(const std::string& name);

/// Samples the system's default input signal on an N-point grid.
Eigen::MatrixXd sample_inputs(const SystemSpec& spec, Eigen::Index n_samples, double h,
                              double t0 = 0.0);

/// Simulates the system with its ground-truth coefficients.
Trajectory simulate_system(const SystemSpec& spec, double h, Eigen::Index n_samples);
Trajectory simulate_system(const SystemSpec& spec);

/// Embedded annual hare/lynx pelt series (Hudson Bay Company, 1900-1920),
/// states in thousands of pelts, no inputs, h = 1 year.
Trajectory hudson_bay_dataset();

}  // namespace merinda
