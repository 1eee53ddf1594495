#include "merinda/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "merinda/errors.hpp"

namespace merinda {

void Trajectory::validate() const {
    if (times.size() < 2) throw TooShortError("trajectory needs at least 2 samples");
    if (states.rows() != times.size())
        throw IoError("state row count does not match time grid");
    if (inputs.size() > 0 && inputs.rows() != times.size())
        throw IoError("input row count does not match time grid");
    const double h = times(1) - times(0);
    if (!(h > 0)) throw IoError("times must be strictly increasing");
    for (Eigen::Index i = 1; i + 1 < times.size(); ++i) {
        const double hi = times(i + 1) - times(i);
        if (std::abs(hi - h) > 1e-12 * std::max(std::abs(h), 1.0))
            throw IoError("time grid is not uniform");
    }
}

Trajectory add_noise(const Trajectory& traj, const NoiseSpec& noise) {
    if (noise.kind == NoiseSpec::Kind::none || noise.sigma == 0.0) return traj;
    Trajectory out = traj;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> dist(0.0, noise.sigma);
    for (Eigen::Index i = 0; i < out.states.rows(); ++i)
        for (Eigen::Index j = 0; j < out.states.cols(); ++j) out.states(i, j) += dist(rng);
    return out;
}

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "t";
    for (Eigen::Index j = 0; j < traj.n_states(); ++j) out << ",x" << j;
    for (Eigen::Index j = 0; j < traj.n_inputs(); ++j) out << ",u" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < traj.samples(); ++i) {
        out << format_value(traj.times(i));
        for (Eigen::Index j = 0; j < traj.n_states(); ++j)
            out << "," << format_value(traj.states(i, j));
        for (Eigen::Index j = 0; j < traj.n_inputs(); ++j)
            out << "," << format_value(traj.inputs(i, j));
        out << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    Eigen::Index n = 0, m = 0;
    {
        std::stringstream header(line);
        std::string col;
        bool first = true;
        while (std::getline(header, col, ',')) {
            if (first) {
                if (col != "t") throw IoError("trajectory CSV must start with a 't' column");
                first = false;
            } else if (!col.empty() && col[0] == 'x') {
                ++n;
            } else if (!col.empty() && col[0] == 'u') {
                ++m;
            } else {
                throw IoError("unexpected trajectory CSV column: " + col);
            }
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<Eigen::Index>(row.size()) != 1 + n + m)
            throw IoError("trajectory CSV row has wrong column count");
        rows.push_back(std::move(row));
    }
    Trajectory traj;
    const Eigen::Index count = static_cast<Eigen::Index>(rows.size());
    traj.times.resize(count);
    traj.states.resize(count, n);
    traj.inputs.resize(count, m);
    for (Eigen::Index i = 0; i < count; ++i) {
        traj.times(i) = rows[i][0];
        for (Eigen::Index j = 0; j < n; ++j) traj.states(i, j) = rows[i][1 + j];
        for (Eigen::Index j = 0; j < m; ++j) traj.inputs(i, j) = rows[i][1 + n + j];
    }
    traj.validate();
    return traj;
}

}  // namespace merinda
