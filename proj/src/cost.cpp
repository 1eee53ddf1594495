#include "merinda/cost.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "merinda/config.hpp"
#include "merinda/errors.hpp"

namespace merinda {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i stays integral at every step
        const std::uint64_t factor = n - k + i;
        if (result > UINT64_MAX / factor)
            throw OverflowError("binomial coefficient overflows 64 bits");
        result = result * factor / i;
    }
    return result;
}

double memory_model(const MemoryModelParams& p) {
    if (p.n_states < 1 || p.order < 1 || p.ctlv_size < 0 || p.bits_ctlv < 0 || p.bits_real < 0)
        throw std::invalid_argument("memory model parameters must be positive");
    const std::uint64_t n = static_cast<std::uint64_t>(p.n_states);
    const std::uint64_t m = static_cast<std::uint64_t>(p.order);
    const std::uint64_t lib = binomial(m + n, m);
    const std::uint64_t ctlv = n * static_cast<std::uint64_t>(p.ctlv_size) *
                               static_cast<std::uint64_t>(p.bits_ctlv);
    const std::uint64_t reals =
        (n + lib + n * lib + std::max(n * n, m * m)) * static_cast<std::uint64_t>(p.bits_real);
    return static_cast<double>(ctlv + reals);
}

double energy_model(const EnergyModelParams& p) {
    if (p.n_states < 1 || p.order < 1 || p.epochs < 1)
        throw std::invalid_argument("energy model requires N >= 1, M >= 1, T >= 1");
    const double n = p.n_states;
    const double lib = static_cast<double>(
        binomial(static_cast<std::uint64_t>(p.order + p.n_states),
                 static_cast<std::uint64_t>(p.order)));
    const double per_epoch = n * p.ctlv_size * p.conv_weights * (p.p_fwd_ctlv + p.p_bwd_ctlv) +
                             n * (p.p_fwd_autodiff + p.p_bwd_autodiff) +
                             lib * (p.p_fwd_relu + p.p_bwd_relu) +
                             p.horizon * lib * lib * p.p_mult +
                             p.horizon * n * lib * p.p_mult;
    return static_cast<double>(p.epochs) * per_epoch * p.stiffness;
}

std::vector<SweepPoint> koopman_sweep(const std::vector<std::pair<int, int>>& schedule,
                                      const MemoryModelParams& mem,
                                      const EnergyModelParams& energy) {
    if (schedule.empty()) throw std::invalid_argument("exchange schedule is empty");
    std::vector<SweepPoint> points;
    points.reserve(schedule.size());
    for (const auto& [n, m] : schedule) {
        if (n < 1 || m < 1)
            throw std::invalid_argument("schedule entries need N >= 1 and M >= 1");
        MemoryModelParams mp = mem;
        mp.n_states = n;
        mp.order = m;
        EnergyModelParams ep = energy;
        ep.n_states = n;
        ep.order = m;
        SweepPoint point;
        point.n_states = n;
        point.order = m;
        point.memory_bits = memory_model(mp);
        point.energy = energy_model(ep);
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<std::pair<int, int>> default_exchange_schedule() {
    return {{2, 3}, {3, 2}, {5, 1}};
}

Correlation pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw UndefinedCorrelationError("pearson correlation needs >= 3 paired points");
    const double count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedCorrelationError("zero variance makes correlation undefined");
    Correlation result;
    result.r = sxy / std::sqrt(sxx * syy);
    const double dof = count - 2.0;
    const double r2 = std::min(result.r * result.r, 1.0 - 1e-15);
    const double t = std::abs(result.r) * std::sqrt(dof / (1.0 - r2));
    boost::math::students_t dist(dof);
    result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
    return result;
}

CostConfig parse_cost_config(const std::string& text) {
    CostConfig cfg;
    const auto kv = parse_flat_config(text);
    for (const auto& [key, value] : kv) {
        if (key == "n_states") {
            cfg.memory.n_states = cfg.energy.n_states = std::stoi(value);
        } else if (key == "order") {
            cfg.memory.order = cfg.energy.order = std::stoi(value);
        } else if (key == "ctlv_size") {
            cfg.memory.ctlv_size = cfg.energy.ctlv_size = std::stoi(value);
        } else if (key == "bits_ctlv") {
            cfg.memory.bits_ctlv = std::stoi(value);
        } else if (key == "bits_real") {
            cfg.memory.bits_real = std::stoi(value);
        } else if (key == "conv_weights") {
            cfg.energy.conv_weights = std::stod(value);
        } else if (key == "p_fwd_ctlv") {
            cfg.energy.p_fwd_ctlv = std::stod(value);
        } else if (key == "p_bwd_ctlv") {
            cfg.energy.p_bwd_ctlv = std::stod(value);
        } else if (key == "p_fwd_autodiff") {
            cfg.energy.p_fwd_autodiff = std::stod(value);
        } else if (key == "p_bwd_autodiff") {
            cfg.energy.p_bwd_autodiff = std::stod(value);
        } else if (key == "p_fwd_relu") {
            cfg.energy.p_fwd_relu = std::stod(value);
        } else if (key == "p_bwd_relu") {
            cfg.energy.p_bwd_relu = std::stod(value);
        } else if (key == "p_mult") {
            cfg.energy.p_mult = std::stod(value);
        } else if (key == "horizon") {
            cfg.energy.horizon = std::stod(value);
        } else if (key == "epochs") {
            cfg.energy.epochs = std::stoi(value);
        } else if (key == "stiffness") {
            cfg.energy.stiffness = std::stod(value);
        } else {
            throw IoError("unknown cost config key: " + key);
        }
    }
    return cfg;
}

CostConfig load_cost_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_cost_config(buffer.str());
}

}  // namespace merinda
