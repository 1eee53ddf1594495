#include "merinda/systems.hpp"

#include <cmath>

#include "merinda/errors.hpp"
#include "merinda/integrate.hpp"

namespace merinda {

// Ground-truth constants are documented in CONSTANTS.md. Library variables
// are ordered states first, then input channels.

namespace {

CoefficientMatrix make_coeffs(int n_states, int n_inputs, int order) {
    CoefficientMatrix c;
    c.library = build_library(n_states + n_inputs, order);
    c.values = Eigen::MatrixXd::Zero(n_states, c.library.size());
    return c;
}

SystemSpec make_lotka() {
    SystemSpec s;
    s.name = "lotka";
    s.n_states = 2;
    s.n_inputs = 0;
    s.library_order = 2;
    s.nonlinear_term_count = 2;
    const double a = 1.0, b = 0.1, c = 1.5, d = 0.075;
    s.true_coefficients = make_coeffs(2, 0, 2);
    s.true_coefficients.set(0, {1, 0}, a);
    s.true_coefficients.set(0, {1, 1}, -b);
    s.true_coefficients.set(1, {0, 1}, -c);
    s.true_coefficients.set(1, {1, 1}, d);
    s.sim.h = 0.05;
    s.sim.steps = 500;
    s.sim.x0 = Eigen::Vector2d(30.0, 5.0);
    return s;
}

SystemSpec make_lorenz() {
    SystemSpec s;
    s.name = "lorenz";
    s.n_states = 3;
    s.n_inputs = 0;
    s.library_order = 2;
    s.nonlinear_term_count = 2;
    const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    s.true_coefficients = make_coeffs(3, 0, 2);
    s.true_coefficients.set(0, {1, 0, 0}, -sigma);
    s.true_coefficients.set(0, {0, 1, 0}, sigma);
    s.true_coefficients.set(1, {1, 0, 0}, rho);
    s.true_coefficients.set(1, {0, 1, 0}, -1.0);
    s.true_coefficients.set(1, {1, 0, 1}, -1.0);
    s.true_coefficients.set(2, {1, 1, 0}, 1.0);
    s.true_coefficients.set(2, {0, 0, 1}, -beta);
    s.sim.h = 0.01;
    s.sim.steps = 1000;
    s.sim.x0 = Eigen::Vector3d(-8.0, 7.0, 27.0);
    return s;
}

// F8 Crusader longitudinal dynamics (Garrard & Jordan), cubic model with a
// single elevator input.
SystemSpec make_f8() {
    SystemSpec s;
    s.name = "f8";
    s.n_states = 3;
    s.n_inputs = 1;
    s.library_order = 3;
    s.nonlinear_term_count = 8;
    s.true_coefficients = make_coeffs(3, 1, 3);
    auto& c = s.true_coefficients;
    // x0: angle of attack, x1: pitch angle, x2: pitch rate, u: elevator
    c.set(0, {1, 0, 0, 0}, -0.877);
    c.set(0, {0, 0, 1, 0}, 1.0);
    c.set(0, {1, 0, 1, 0}, -0.088);
    c.set(0, {2, 0, 0, 0}, 0.47);
    c.set(0, {0, 2, 0, 0}, -0.019);
    c.set(0, {2, 0, 1, 0}, -1.0);
    c.set(0, {3, 0, 0, 0}, 3.846);
    c.set(0, {0, 0, 0, 1}, -0.215);
    c.set(0, {2, 0, 0, 1}, 0.28);
    c.set(0, {1, 0, 0, 2}, 0.47);
    c.set(0, {0, 0, 0, 3}, 0.63);
    c.set(1, {0, 0, 1, 0}, 1.0);
    c.set(2, {1, 0, 0, 0}, -4.208);
    c.set(2, {0, 0, 1, 0}, -0.396);
    c.set(2, {2, 0, 0, 0}, -0.47);
    c.set(2, {3, 0, 0, 0}, -3.564);
    c.set(2, {0, 0, 0, 1}, -20.967);
    c.set(2, {2, 0, 0, 1}, 6.265);
    c.set(2, {1, 0, 0, 2}, 46.0);
    c.set(2, {0, 0, 0, 3}, 61.4);
    s.sim.h = 0.01;
    s.sim.steps = 1000;
    s.sim.x0 = Eigen::Vector3d(0.1, 0.0, 0.0);
    s.input_signal = [](double t) {
        Eigen::VectorXd u(1);
        u(0) = 0.03 * std::sin(0.7 * t) + 0.02 * std::sin(1.9 * t);
        return u;
    };
    return s;
}

// Five-state pathogen / immune-response model with a drug input (see
// CONSTANTS.md for provenance).
SystemSpec make_pathogenic() {
    SystemSpec s;
    s.name = "pathogenic";
    s.n_states = 5;
    s.n_inputs = 1;
    s.library_order = 3;
    s.nonlinear_term_count = 5;
    s.true_coefficients = make_coeffs(5, 1, 3);
    auto& c = s.true_coefficients;
    // x0 pathogen, x1 innate response, x2 adaptive response,
    // x3 antibodies, x4 tissue damage, u drug dose
    c.set(0, {1, 0, 0, 0, 0, 0}, 0.8);
    c.set(0, {1, 1, 0, 0, 0, 0}, -0.4);
    c.set(0, {1, 0, 0, 1, 0, 0}, -0.25);
    c.set(1, {0, 0, 0, 0, 0, 0}, 0.5);
    c.set(1, {0, 1, 0, 0, 0, 0}, -0.5);
    c.set(1, {1, 1, 0, 0, 0, 0}, 0.3);
    c.set(1, {0, 0, 0, 0, 0, 1}, 1.0);
    c.set(2, {1, 0, 0, 0, 0, 0}, 0.4);
    c.set(2, {0, 0, 1, 0, 0, 0}, -0.35);
    c.set(3, {0, 0, 1, 0, 0, 0}, 0.5);
    c.set(3, {0, 0, 0, 1, 0, 0}, -0.3);
    c.set(3, {1, 0, 1, 1, 0, 0}, 0.1);
    c.set(4, {2, 0, 0, 0, 0, 0}, 0.25);
    c.set(4, {0, 0, 0, 0, 1, 0}, -0.5);
    s.sim.h = 0.05;
    s.sim.steps = 600;
    s.sim.x0 = (Eigen::VectorXd(5) << 1.0, 0.5, 0.2, 0.1, 0.05).finished();
    s.input_signal = [](double t) {
        Eigen::VectorXd u(1);
        u(0) = 0.05 * (1.0 + std::sin(0.2 * t));
        return u;
    };
    return s;
}

// Bergman minimal model of glucose-insulin dynamics, rescaled so one time
// unit equals the 5-minute CGM cadence.
SystemSpec make_aid() {
    SystemSpec s;
    s.name = "aid";
    s.n_states = 3;
    s.n_inputs = 1;
    s.library_order = 2;
    s.nonlinear_term_count = 1;
    const double p1 = 0.028735 * 5.0;
    const double p2 = 0.028344 * 5.0;
    const double p3 = 5.035e-5 * 5.0;
    const double n = (5.0 / 54.0) * 5.0;
    const double gb = 81.3, ib = 15.0;
    s.true_coefficients = make_coeffs(3, 1, 2);
    auto& c = s.true_coefficients;
    // x0 glucose, x1 remote insulin action, x2 plasma insulin, u infusion
    c.set(0, {0, 0, 0, 0}, p1 * gb);
    c.set(0, {1, 0, 0, 0}, -p1);
    c.set(0, {1, 1, 0, 0}, -1.0);
    c.set(1, {0, 1, 0, 0}, -p2);
    c.set(1, {0, 0, 1, 0}, p3);
    c.set(1, {0, 0, 0, 0}, -p3 * ib);
    c.set(2, {0, 0, 1, 0}, -n);
    c.set(2, {0, 0, 0, 0}, n * ib);
    c.set(2, {0, 0, 0, 1}, 1.0);
    s.sim.h = 1.0;
    s.sim.steps = 200;
    s.sim.x0 = Eigen::Vector3d(gb + 40.0, 0.0, ib);
    s.input_signal = [](double t) {
        Eigen::VectorXd u(1);
        // basal infusion plus a smooth bolus pulse early in the trace
        u(0) = 2.0 + 8.0 * std::exp(-0.5 * std::pow((t - 20.0) / 6.0, 2.0));
        return u;
    };
    return s;
}

}  // namespace

std::vector<std::string> catalog_names() {
    return {"aid", "lotka", "lorenz", "pathogenic", "f8"};
}

SystemSpec catalog_system(const std::string& name) {
    if (name == "lotka") return make_lotka();
    if (name == "lorenz") return make_lorenz();
    if (name == "f8") return make_f8();
    if (name == "pathogenic") return make_pathogenic();
    if (name == "aid") return make_aid();
    std::string valid;
    for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw UnknownSystemError("unknown system '" + name + "' (valid: " + valid + ")");
}

Eigen::MatrixXd sample_inputs(const SystemSpec& spec, Eigen::Index n_samples, double h,
                              double t0) {
    Eigen::MatrixXd inputs(n_samples, spec.n_inputs);
    if (spec.n_inputs == 0) return inputs;
    for (Eigen::Index i = 0; i < n_samples; ++i)
        inputs.row(i) = spec.input_signal(t0 + static_cast<double>(i) * h);
    return inputs;
}

Trajectory simulate_system(const SystemSpec& spec, double h, Eigen::Index n_samples) {
    const Eigen::MatrixXd inputs = sample_inputs(spec, n_samples, h);
    return integrate(spec.field(), spec.sim.x0, inputs, h, n_samples);
}

Trajectory simulate_system(const SystemSpec& spec) {
    return simulate_system(spec, spec.sim.h, spec.sim.steps);
}

}  // namespace merinda
