#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "merinda/gru.hpp"
#include "merinda/library.hpp"
#include "merinda/trajectory.hpp"

namespace merinda {

struct TrainConfig {
    int batch_size = 16;      // S_B
    int window_length = 20;   // k
    int window_stride = 5;
    int epochs = 500;         // T
    double learning_rate = 1e-2;
    double final_learning_rate = 1e-5;  // geometric decay target at epoch T
    int prune_epoch = 250;              // top-|Theta| mask activates here
    int target_sparsity = 0;            // |Theta|; 0 = full library (no pruning)
    std::uint64_t seed = 0;
    double solver_step = 0.0;  // 0 = trajectory step
    int hidden_size = 16;      // V
    double grad_clip = 10.0;
    bool median_aggregation = false;  // mean is the default
    bool parallel = true;             // per-window OpenMP; result is identical either way

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

struct RecoveryResult {
    CoefficientMatrix coefficients;
    Eigen::VectorXd input_shifts;
    std::vector<double> loss_history;  // one entry per completed epoch
    double reconstruction_mse = 0.0;
    bool reconstruction_diverged = false;
    double coefficient_mse = -1.0;  // -1 when no ground truth available
    double support_precision = -1.0;
    double support_recall = -1.0;
    bool pass = true;  // epsilon gate, when requested
    GruModel model;
    TrainConfig config;
};

/// Trains the GRU + dense head on overlapping windows with the ODE loss
/// (Adam, gradient-norm clip, magnitude top-k pruning frozen at
/// prune_epoch). Deterministic for a fixed seed and thread count.
RecoveryResult train(const Trajectory& data, const PolynomialLibrary& library,
                     const TrainConfig& config);

struct RecoverOptions {
    TrainConfig config;
    bool config_overridden = false;  // when false, per-system defaults apply
    std::optional<double> epsilon;   // pass gate on reconstruction MSE
    NoiseSpec noise;
    std::optional<double> dt;
    std::optional<Eigen::Index> steps;
};

/// End-to-end pipeline for a catalog system: simulate (or use supplied
/// data), build the library at the system's order, train, score both MSE
/// metrics and support precision/recall against the ground truth.
RecoveryResult recover(const std::string& system_name, const RecoverOptions& options);
RecoveryResult recover_from_data(const Trajectory& data, const PolynomialLibrary& library,
                                 const RecoverOptions& options,
                                 const CoefficientMatrix* ground_truth);

/// Per-system training defaults tuned for desk-scale runs.
TrainConfig default_train_config(const std::string& system_name);

/// Model + config checkpoint (versioned JSON); round-trips exactly.
void save_checkpoint(const RecoveryResult& result, const std::string& path);
GruModel load_checkpoint_model(const std::string& path, TrainConfig* config_out = nullptr);

/// Loss history CSV `epoch,loss`.
void write_loss_history_csv(const std::vector<double>& history, const std::string& path);

}  // namespace merinda
