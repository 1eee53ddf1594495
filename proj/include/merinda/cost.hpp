#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace merinda {

/// Checked binomial C(n, k); throws OverflowError past 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct MemoryModelParams {
    int n_states = 2;   // N
    int order = 2;      // M
    int ctlv_size = 16; // V
    int bits_ctlv = 32; // b_c, bits per CTLV weight
    int bits_real = 32; // b_r, bits per real number
};

struct EnergyModelParams {
    int n_states = 2;
    int order = 2;
    int ctlv_size = 16;
    double conv_weights = 1.0;  // w_c, convolution weights per epoch
    double p_fwd_ctlv = 10.0, p_bwd_ctlv = 10.0;
    double p_fwd_autodiff = 1.0, p_bwd_autodiff = 1.0;
    double p_fwd_relu = 1.0, p_bwd_relu = 1.0;
    double p_mult = 0.01;
    double horizon = 10000.0;  // H, samples
    int epochs = 1;            // T
    double stiffness = 1.0;    // optional multiplier; 1.0 = formula verbatim
};

/// Memory footprint in bits:
///   N*V*b_c + (N + C(M+N,M) + N*C(M+N,M) + max(N^2, M^2)) * b_r
double memory_model(const MemoryModelParams& p);

/// Training energy:
///   T * [ N*V*w_c*(p_f_c + p_b_c) + N*(p_f_a + p_b_a)
///         + C(M+N,M)*(p_f_l + p_b_l)
///         + H*C(N+M,M)^2*p_m + H*N*C(M+N,M)*p_m ]
double energy_model(const EnergyModelParams& p);

struct SweepPoint {
    int n_states = 0;
    int order = 0;
    double memory_bits = 0.0;
    double energy = 0.0;
    std::string label;  // optional "(NL,PO,SV)" annotation
};

/// Evaluates both models at every (N, M) pair of a nonlinearity-for-
/// dimensionality exchange schedule. The schedule itself is caller input.
std::vector<SweepPoint> koopman_sweep(const std::vector<std::pair<int, int>>& schedule,
                                      const MemoryModelParams& mem,
                                      const EnergyModelParams& energy);

/// The (N, M) schedule used by the trend tests: trades polynomial order
/// down as state count grows.
std::vector<std::pair<int, int>> default_exchange_schedule();

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

/// Pearson r with a two-sided p-value from the t distribution (len-2 dof).
/// Throws UndefinedCorrelationError on fewer than 3 points or zero
/// variance.
Correlation pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

/// Flat `key = value` config for the model constants; unknown keys throw.
struct CostConfig {
    MemoryModelParams memory;
    EnergyModelParams energy;
};
CostConfig parse_cost_config(const std::string& text);
CostConfig load_cost_config(const std::string& path);

}  // namespace merinda
