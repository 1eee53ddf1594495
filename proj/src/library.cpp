#include "merinda/library.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "merinda/cost.hpp"
#include "merinda/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace merinda {

namespace {

void emit_degree(int n_vars, int var, int remaining, std::vector<int>& current,
                 std::vector<std::vector<int>>& out) {
    if (var + 1 == n_vars) {
        current[var] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = e;
        emit_degree(n_vars, var + 1, remaining - e, current, out);
    }
}

}  // namespace

PolynomialLibrary build_library(int n_vars, int max_order) {
    if (n_vars < 1 || max_order < 1)
        throw std::invalid_argument("build_library requires n_vars >= 1 and max_order >= 1");
    const std::uint64_t count =
        binomial(static_cast<std::uint64_t>(max_order + n_vars), static_cast<std::uint64_t>(n_vars));
    if (count > 100000)
        throw LibraryTooLargeError("library would have " + std::to_string(count) +
                                   " terms (limit 100000)");
    PolynomialLibrary lib;
    lib.n_vars = n_vars;
    lib.max_order = max_order;
    lib.terms.reserve(count);
    std::vector<int> current(n_vars, 0);
    for (int degree = 0; degree <= max_order; ++degree)
        emit_degree(n_vars, 0, degree, current, lib.terms);
    return lib;
}

Eigen::VectorXd PolynomialLibrary::eval_point(const Eigen::VectorXd& v) const {
    // power table: powers(var, e) = v[var]^e
    Eigen::MatrixXd powers(n_vars, max_order + 1);
    powers.col(0).setOnes();
    for (int e = 1; e <= max_order; ++e)
        powers.col(e) = powers.col(e - 1).cwiseProduct(v);
    Eigen::VectorXd phi(size());
    for (Eigen::Index j = 0; j < size(); ++j) {
        double prod = 1.0;
        for (int var = 0; var < n_vars; ++var) {
            const int e = terms[j][var];
            if (e > 0) prod *= powers(var, e);
        }
        phi(j) = prod;
    }
    return phi;
}

Eigen::MatrixXd PolynomialLibrary::evaluate_serial(const Eigen::MatrixXd& points) const {
    if (points.cols() != n_vars)
        throw std::invalid_argument("point dimension does not match library variables");
    Eigen::MatrixXd design(points.rows(), size());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        design.row(i) = eval_point(points.row(i));
    return design;
}

Eigen::MatrixXd PolynomialLibrary::evaluate(const Eigen::MatrixXd& points) const {
    if (points.cols() != n_vars)
        throw std::invalid_argument("point dimension does not match library variables");
    Eigen::MatrixXd design(points.rows(), size());
    const Eigen::Index rows = points.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i)
        design.row(i) = eval_point(points.row(i));
    return design;
}

Eigen::MatrixXd PolynomialLibrary::eval_jacobian(const Eigen::VectorXd& v) const {
    Eigen::MatrixXd powers(n_vars, max_order + 1);
    powers.col(0).setOnes();
    for (int e = 1; e <= max_order; ++e)
        powers.col(e) = powers.col(e - 1).cwiseProduct(v);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), n_vars);
    for (Eigen::Index j = 0; j < size(); ++j) {
        for (int var = 0; var < n_vars; ++var) {
            const int e = terms[j][var];
            if (e == 0) continue;
            double prod = static_cast<double>(e) * powers(var, e - 1);
            for (int other = 0; other < n_vars; ++other) {
                if (other == var) continue;
                const int eo = terms[j][other];
                if (eo > 0) prod *= powers(other, eo);
            }
            jac(j, var) = prod;
        }
    }
    return jac;
}

std::string PolynomialLibrary::term_name(Eigen::Index j) const {
    std::string name;
    for (int var = 0; var < n_vars; ++var) {
        const int e = terms[j][var];
        if (e == 0) continue;
        if (!name.empty()) name += "*";
        name += "x" + std::to_string(var);
        if (e > 1) name += "^" + std::to_string(e);
    }
    return name.empty() ? "1" : name;
}

Eigen::Index PolynomialLibrary::term_index(const std::vector<int>& exponents) const {
    for (Eigen::Index j = 0; j < size(); ++j)
        if (terms[j] == exponents) return j;
    return -1;
}

std::string PolynomialLibrary::terms_json() const {
    std::string out = "[";
    for (Eigen::Index j = 0; j < size(); ++j) {
        if (j > 0) out += ",";
        out += "[";
        for (int var = 0; var < n_vars; ++var) {
            if (var > 0) out += ",";
            out += std::to_string(terms[j][var]);
        }
        out += "]";
    }
    return out + "]";
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> CoefficientMatrix::support() const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> s;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            if (values(i, j) != 0.0) s.emplace_back(i, j);
    return s;
}

Eigen::Index CoefficientMatrix::support_size() const {
    return static_cast<Eigen::Index>(support().size());
}

void CoefficientMatrix::set(Eigen::Index state, const std::vector<int>& exponents,
                            double value) {
    const Eigen::Index j = library.term_index(exponents);
    if (j < 0) throw std::invalid_argument("monomial not in library");
    values(state, j) = value;
}

void write_coefficients_csv(const CoefficientMatrix& coeffs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "state";
    for (Eigen::Index j = 0; j < coeffs.library.size(); ++j)
        out << "," << coeffs.library.term_name(j);
    out << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < coeffs.values.rows(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < coeffs.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", coeffs.values(i, j));
            out << "," << buf;
        }
        out << "\n";
    }
}

CoefficientMatrix read_coefficients_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    // Recover (n_vars, order) from the monomial header.
    std::vector<std::string> names;
    {
        std::stringstream header(line);
        std::string col;
        std::getline(header, col, ',');  // "state"
        while (std::getline(header, col, ',')) names.push_back(col);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // state index
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != names.size())
            throw IoError("coefficient CSV row has wrong column count");
        rows.push_back(std::move(row));
    }
    // Infer (n_vars, order) by parsing monomial names back into exponents.
    int n_vars = 0, order = 0;
    for (const auto& name : names) {
        if (name == "1") continue;
        std::stringstream ss(name);
        std::string factor;
        int total = 0;
        while (std::getline(ss, factor, '*')) {
            const auto caret = factor.find('^');
            const int var = std::stoi(
                factor.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
            const int e = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
            n_vars = std::max(n_vars, var + 1);
            total += e;
        }
        order = std::max(order, total);
    }
    CoefficientMatrix coeffs;
    coeffs.library = build_library(std::max(n_vars, 1), std::max(order, 1));
    if (coeffs.library.size() != static_cast<Eigen::Index>(names.size()))
        throw IoError("coefficient CSV header does not match a canonical library");
    for (Eigen::Index j = 0; j < coeffs.library.size(); ++j)
        if (coeffs.library.term_name(j) != names[static_cast<std::size_t>(j)])
            throw IoError("coefficient CSV columns are not in canonical term order");
    coeffs.values.resize(static_cast<Eigen::Index>(rows.size()), coeffs.library.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            coeffs.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return coeffs;
}

VectorField rhs_from_coefficients(const CoefficientMatrix& coeffs, Eigen::Index n_state_vars) {
    const Eigen::Index lib_vars = coeffs.library.n_vars;
    if (lib_vars < n_state_vars)
        throw std::invalid_argument("library has fewer variables than states");
    const Eigen::Index n_input_vars = lib_vars - n_state_vars;
    // copies are cheap; the lambda owns its own library + values
    return [coeffs, n_state_vars, n_input_vars](const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& u, double) {
        Eigen::VectorXd v(n_state_vars + n_input_vars);
        v.head(n_state_vars) = x;
        if (n_input_vars > 0) v.tail(n_input_vars) = u.head(n_input_vars);
        return Eigen::VectorXd(coeffs.values * coeffs.library.eval_point(v));
    };
}

Eigen::MatrixXd finite_difference_derivatives(const Trajectory& traj) {
    const Eigen::Index count = traj.samples();
    if (count < 3) throw TooShortError("finite differences need at least 3 samples");
    const double h = traj.step();
    const auto& y = traj.states;
    Eigen::MatrixXd dy(count, traj.n_states());
    dy.row(0) = (-3.0 * y.row(0) + 4.0 * y.row(1) - y.row(2)) / (2.0 * h);
    for (Eigen::Index i = 1; i + 1 < count; ++i)
        dy.row(i) = (y.row(i + 1) - y.row(i - 1)) / (2.0 * h);
    dy.row(count - 1) =
        (3.0 * y.row(count - 1) - 4.0 * y.row(count - 2) + y.row(count - 3)) / (2.0 * h);
    return dy;
}

}  // namespace merinda
