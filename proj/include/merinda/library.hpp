#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "merinda/integrate.hpp"
#include "merinda/trajectory.hpp"

namespace merinda {

/// Ordered multi-index set of monomial features over n_vars variables up
/// to total degree max_order. Term order is total degree, then
/// lexicographic with earlier variables ranked first; term 0 is the
/// constant 1. This ordering is the stable contract for every coefficient
/// matrix, CSV column and JSON export in the project.
struct PolynomialLibrary {
    int n_vars = 0;
    int max_order = 0;
    std::vector<std::vector<int>> terms;  // exponent vectors, length n_vars

    Eigen::Index size() const { return static_cast<Eigen::Index>(terms.size()); }

    /// Feature row phi(v) for a single point.
    Eigen::VectorXd eval_point(const Eigen::VectorXd& v) const;

    /// Design matrix over many points (OpenMP over rows). Output is
    /// bitwise identical to evaluate_serial.
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd evaluate_serial(const Eigen::MatrixXd& points) const;

    /// d phi / d v at a point: P x n_vars.
    Eigen::MatrixXd eval_jacobian(const Eigen::VectorXd& v) const;

    /// Human-readable monomial name, e.g. "1", "x0*x1", "x2^2".
    std::string term_name(Eigen::Index j) const;

    /// Index of the term with the given exponents, or -1.
    Eigen::Index term_index(const std::vector<int>& exponents) const;

    /// Ordered JSON array of exponent vectors.
    std::string terms_json() const;
};

PolynomialLibrary build_library(int n_vars, int max_order);

/// n_states x P coefficient matrix mapping library features to state
/// derivatives.
struct CoefficientMatrix {
    PolynomialLibrary library;
    Eigen::MatrixXd values;  // n_states x P

    Eigen::Index n_states() const { return values.rows(); }

    /// (state, term) pairs with nonzero value, row-major order.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> support() const;
    Eigen::Index support_size() const;

    void set(Eigen::Index state, const std::vector<int>& exponents, double value);
};

/// CSV with a monomial-name header row; one row per state.
void write_coefficients_csv(const CoefficientMatrix& coeffs, const std::string& path);
CoefficientMatrix read_coefficients_csv(const std::string& path);

/// Field computing xdot = values * phi([x; u]). The library's variable
/// count must equal n_state_vars (+ input count when inputs are part of
/// the library).
VectorField rhs_from_coefficients(const CoefficientMatrix& coeffs, Eigen::Index n_state_vars);

/// O(h^2) time derivatives: central differences inside, one-sided
/// second-order stencils at both ends. Throws TooShortError for N < 3.
Eigen::MatrixXd finite_difference_derivatives(const Trajectory& traj);

}  // namespace merinda
