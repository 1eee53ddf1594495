#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace merinda {

/// GRU layer plus dense coefficient head. The head emits n_coeff flattened
/// coefficient estimates (row-major over states x library terms) followed
/// by n_shift per-input-channel shift values. Coefficient outputs are
/// subject to the active mask; shift outputs never are.
struct GruModel {
    int hidden_size = 0;  // V
    int input_size = 0;   // |Y| + m
    int n_coeff = 0;      // n * P
    int n_shift = 0;      // q = m

    Eigen::MatrixXd w_reset, w_update, w_cand;  // V x (V + input_size)
    Eigen::VectorXd b_reset, b_update, b_cand;  // V
    Eigen::MatrixXd w_head;                     // (n_coeff + n_shift) x V
    Eigen::VectorXd b_head;

    std::vector<std::uint8_t> active;  // n_coeff entries; 1 = output kept

    static GruModel init(int hidden_size, int input_size, int n_coeff, int n_shift,
                         std::uint64_t seed);

    Eigen::Index head_outputs() const { return w_head.rows(); }
    Eigen::Index active_count() const;

    /// Versioned JSON blob with every weight matrix, the mask, and shapes.
    std::string to_json() const;
    static GruModel from_json(const std::string& text);
};

/// Per-step intermediates kept for the backward pass.
struct GruCellCache {
    Eigen::VectorXd a_prev;  // V
    Eigen::VectorXd x;       // input_size
    Eigen::VectorXd r, z, cc, a;
};

/// One GRU cell step: r/z gates, candidate, cell state, a[t] = c[t].
Eigen::VectorXd gru_cell_forward(const GruModel& model, const Eigen::VectorXd& a_prev,
                                 const Eigen::VectorXd& x, GruCellCache& cache);

/// Folds the cell over a k x input_size window from a zero hidden state.
Eigen::VectorXd gru_sequence_forward(const GruModel& model, const Eigen::MatrixXd& window,
                                     std::vector<GruCellCache>& caches);

/// Affine head with masking: masked coefficient outputs are exactly zero.
void head_forward(const GruModel& model, const Eigen::VectorXd& hidden,
                  Eigen::VectorXd& theta_flat, Eigen::VectorXd& shifts);

struct GruGradients {
    Eigen::MatrixXd w_reset, w_update, w_cand, w_head;
    Eigen::VectorXd b_reset, b_update, b_cand, b_head;

    static GruGradients zeros_like(const GruModel& model);
    void add_scaled(const GruGradients& other, double scale);
    void scale(double factor);
    double squared_norm() const;
    /// Throws GradientOverflowError naming the first non-finite block.
    void check_finite() const;
};

/// Head backward: accumulates w_head/b_head gradients and returns the
/// hidden-state adjoint. bar_theta must already respect the mask (masked
/// entries receive zero gradient regardless).
Eigen::VectorXd head_backward(const GruModel& model, const Eigen::VectorXd& hidden,
                              const Eigen::VectorXd& bar_theta,
                              const Eigen::VectorXd& bar_shifts, GruGradients& grads);

/// BPTT through the cached sequence given the adjoint of the final hidden
/// state.
void gru_backward(const GruModel& model, const std::vector<GruCellCache>& caches,
                  const Eigen::VectorXd& bar_hidden, GruGradients& grads);

}  // namespace merinda
