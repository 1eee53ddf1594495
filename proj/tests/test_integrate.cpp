#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "merinda/errors.hpp"
#include "merinda/integrate.hpp"

using namespace merinda;

namespace {

VectorField scalar_field(double (*f)(double)) {
    return [f](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
        Eigen::VectorXd dx(1);
        dx(0) = f(x(0));
        return dx;
    };
}

const Eigen::VectorXd kNoInput = Eigen::VectorXd::Zero(0);
const Eigen::MatrixXd kNoInputs = Eigen::MatrixXd::Zero(0, 0);

double decay_endpoint(double h) {
    // x' = -x integrated to t = 1 with fixed-step RK4
    auto f = scalar_field([](double x) { return -x; });
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    const int steps = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i < steps; ++i)
        x = rk4_step(f, x, kNoInput, i * h, h);
    return x(0);
}

}  // namespace

TEST_CASE("rk4 single step matches hand-evaluated stages for x' = -x") {
    auto f = scalar_field([](double x) { return -x; });
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd next = rk4_step(f, x, kNoInput, 0.0, 0.1);
    // k1=-1, k2=-0.95, k3=-0.9525, k4=-0.904750 -> 0.9048375
    CHECK(next(0) == doctest::Approx(0.9048375).epsilon(1e-12));
    // one step of the analytic solution for reference
    CHECK(std::abs(next(0) - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("rk4 fixed point of the zero field") {
    auto f = scalar_field([](double) { return 0.0; });
    Eigen::VectorXd x(1);
    x(0) = 3.25;
    CHECK(rk4_step(f, x, kNoInput, 0.0, 0.7)(0) == 3.25);
}

TEST_CASE("rk4 is exact for constant fields") {
    auto f = scalar_field([](double) { return 1.0; });
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    CHECK(rk4_step(f, x, kNoInput, 0.0, 0.5)(0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("integrate exponential decay hits e^-1 within 1e-6") {
    auto f = scalar_field([](double x) { return -x; });
    const Trajectory traj = integrate(f, Eigen::VectorXd::Ones(1), kNoInputs, 0.1, 11);
    CHECK(traj.samples() == 11);
    CHECK(traj.states(0, 0) == 1.0);
    CHECK(std::abs(traj.states(10, 0) - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("integrate with N=2 takes exactly one step") {
    auto f = scalar_field([](double x) { return -x; });
    const Trajectory traj = integrate(f, Eigen::VectorXd::Ones(1), kNoInputs, 0.1, 2);
    CHECK(traj.samples() == 2);
    CHECK(traj.states(1, 0) == doctest::Approx(0.9048375).epsilon(1e-12));
}

TEST_CASE("fourth-order convergence: halving h shrinks endpoint error ~16x") {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(decay_endpoint(0.1) - exact);
    const double e2 = std::abs(decay_endpoint(0.05) - exact);
    const double e3 = std::abs(decay_endpoint(0.025) - exact);
    CHECK(e1 / e2 >= 15.0);
    CHECK(e2 / e3 >= 15.0);
}

TEST_CASE("divergence guard raises a structured error with the step index") {
    auto f = scalar_field([](double x) { return x * x; });  // finite-time blowup
    Eigen::VectorXd x(1);
    x(0) = 10.0;
    CHECK_THROWS_AS(integrate(f, x, kNoInputs, 0.5, 200), IntegrationDivergedError);
    try {
        integrate(f, x, kNoInputs, 0.5, 200);
    } catch (const IntegrationDivergedError& e) {
        CHECK(e.step() < 200);
    }
}

TEST_CASE("zero-order hold: matrix inputs match an equivalent constant field") {
    // x' = -x + u with constant u = 2
    VectorField forced = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double) {
        return Eigen::VectorXd(-x + u);
    };
    VectorField baked = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
        return Eigen::VectorXd(-x.array() + 2.0);
    };
    const Eigen::MatrixXd inputs = Eigen::MatrixXd::Constant(50, 1, 2.0);
    const Trajectory a = integrate(forced, Eigen::VectorXd::Zero(1), inputs, 0.1, 50);
    const Trajectory b = integrate(baked, Eigen::VectorXd::Zero(1), kNoInputs, 0.1, 50);
    CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
}
