#include "merinda/gru.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "merinda/errors.hpp"

namespace merinda {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

}  // namespace

GruModel GruModel::init(int hidden_size, int input_size, int n_coeff, int n_shift,
                        std::uint64_t seed) {
    GruModel m;
    m.hidden_size = hidden_size;
    m.input_size = input_size;
    m.n_coeff = n_coeff;
    m.n_shift = n_shift;
    std::mt19937_64 rng(seed);
    const Eigen::Index concat = hidden_size + input_size;
    const double gate_bound = 1.0 / std::sqrt(static_cast<double>(concat));
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    m.w_reset = uniform_matrix(hidden_size, concat, gate_bound, rng);
    m.w_update = uniform_matrix(hidden_size, concat, gate_bound, rng);
    m.w_cand = uniform_matrix(hidden_size, concat, gate_bound, rng);
    m.b_reset = Eigen::VectorXd::Zero(hidden_size);
    m.b_update = Eigen::VectorXd::Zero(hidden_size);
    m.b_cand = Eigen::VectorXd::Zero(hidden_size);
    m.w_head = uniform_matrix(n_coeff + n_shift, hidden_size, head_bound, rng);
    m.b_head = Eigen::VectorXd::Zero(n_coeff + n_shift);
    m.active.assign(static_cast<std::size_t>(n_coeff), 1);
    return m;
}

Eigen::Index GruModel::active_count() const {
    Eigen::Index count = 0;
    for (auto flag : active) count += flag ? 1 : 0;
    return count;
}

std::string GruModel::to_json() const {
    nlohmann::json j;
    j["format"] = "merinda-gru";
    j["version"] = 1;
    j["hidden_size"] = hidden_size;
    j["input_size"] = input_size;
    j["n_coeff"] = n_coeff;
    j["n_shift"] = n_shift;
    j["w_reset"] = matrix_json(w_reset);
    j["w_update"] = matrix_json(w_update);
    j["w_cand"] = matrix_json(w_cand);
    j["b_reset"] = matrix_json(b_reset);
    j["b_update"] = matrix_json(b_update);
    j["b_cand"] = matrix_json(b_cand);
    j["w_head"] = matrix_json(w_head);
    j["b_head"] = matrix_json(b_head);
    j["active"] = active;
    return j.dump();
}

GruModel GruModel::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "merinda-gru")
        throw IoError("not a model checkpoint blob");
    GruModel m;
    m.hidden_size = j.at("hidden_size").get<int>();
    m.input_size = j.at("input_size").get<int>();
    m.n_coeff = j.at("n_coeff").get<int>();
    m.n_shift = j.at("n_shift").get<int>();
    m.w_reset = matrix_from_json(j.at("w_reset"));
    m.w_update = matrix_from_json(j.at("w_update"));
    m.w_cand = matrix_from_json(j.at("w_cand"));
    m.b_reset = matrix_from_json(j.at("b_reset")).col(0);
    m.b_update = matrix_from_json(j.at("b_update")).col(0);
    m.b_cand = matrix_from_json(j.at("b_cand")).col(0);
    m.w_head = matrix_from_json(j.at("w_head"));
    m.b_head = matrix_from_json(j.at("b_head")).col(0);
    m.active = j.at("active").get<std::vector<std::uint8_t>>();
    return m;
}

Eigen::VectorXd gru_cell_forward(const GruModel& model, const Eigen::VectorXd& a_prev,
                                 const Eigen::VectorXd& x, GruCellCache& cache) {
    const Eigen::Index v = model.hidden_size;
    Eigen::VectorXd concat(v + model.input_size);
    concat.head(v) = a_prev;
    concat.tail(model.input_size) = x;

    cache.a_prev = a_prev;
    cache.x = x;
    cache.r = (model.w_reset * concat + model.b_reset).unaryExpr([](double t) { return sigmoid(t); });
    cache.z = (model.w_update * concat + model.b_update).unaryExpr([](double t) { return sigmoid(t); });

    Eigen::VectorXd gated(v + model.input_size);
    gated.head(v) = cache.r.cwiseProduct(a_prev);
    gated.tail(model.input_size) = x;
    cache.cc = (model.w_cand * gated + model.b_cand).array().tanh();

    // c[t] = z.cc + (1-z).c[t-1], with c[t-1] = a_prev; a[t] = c[t]
    cache.a = cache.z.cwiseProduct(cache.cc) +
              (Eigen::VectorXd::Ones(v) - cache.z).cwiseProduct(a_prev);
    return cache.a;
}

Eigen::VectorXd gru_sequence_forward(const GruModel& model, const Eigen::MatrixXd& window,
                                     std::vector<GruCellCache>& caches) {
    caches.resize(static_cast<std::size_t>(window.rows()));
    Eigen::VectorXd a = Eigen::VectorXd::Zero(model.hidden_size);
    for (Eigen::Index t = 0; t < window.rows(); ++t)
        a = gru_cell_forward(model, a, window.row(t).transpose(),
                             caches[static_cast<std::size_t>(t)]);
    return a;
}

void head_forward(const GruModel& model, const Eigen::VectorXd& hidden,
                  Eigen::VectorXd& theta_flat, Eigen::VectorXd& shifts) {
    const Eigen::VectorXd out = model.w_head * hidden + model.b_head;
    theta_flat = out.head(model.n_coeff);
    for (int i = 0; i < model.n_coeff; ++i)
        if (!model.active[static_cast<std::size_t>(i)]) theta_flat(i) = 0.0;
    shifts = out.tail(model.n_shift);
}

GruGradients GruGradients::zeros_like(const GruModel& model) {
    GruGradients g;
    g.w_reset = Eigen::MatrixXd::Zero(model.w_reset.rows(), model.w_reset.cols());
    g.w_update = Eigen::MatrixXd::Zero(model.w_update.rows(), model.w_update.cols());
    g.w_cand = Eigen::MatrixXd::Zero(model.w_cand.rows(), model.w_cand.cols());
    g.w_head = Eigen::MatrixXd::Zero(model.w_head.rows(), model.w_head.cols());
    g.b_reset = Eigen::VectorXd::Zero(model.b_reset.size());
    g.b_update = Eigen::VectorXd::Zero(model.b_update.size());
    g.b_cand = Eigen::VectorXd::Zero(model.b_cand.size());
    g.b_head = Eigen::VectorXd::Zero(model.b_head.size());
    return g;
}

void GruGradients::add_scaled(const GruGradients& other, double s) {
    w_reset += s * other.w_reset;
    w_update += s * other.w_update;
    w_cand += s * other.w_cand;
    w_head += s * other.w_head;
    b_reset += s * other.b_reset;
    b_update += s * other.b_update;
    b_cand += s * other.b_cand;
    b_head += s * other.b_head;
}

void GruGradients::scale(double factor) {
    w_reset *= factor;
    w_update *= factor;
    w_cand *= factor;
    w_head *= factor;
    b_reset *= factor;
    b_update *= factor;
    b_cand *= factor;
    b_head *= factor;
}

double GruGradients::squared_norm() const {
    return w_reset.squaredNorm() + w_update.squaredNorm() + w_cand.squaredNorm() +
           w_head.squaredNorm() + b_reset.squaredNorm() + b_update.squaredNorm() +
           b_cand.squaredNorm() + b_head.squaredNorm();
}

void GruGradients::check_finite() const {
    if (!w_reset.allFinite()) throw GradientOverflowError("w_reset", "non-finite gradient in w_reset");
    if (!w_update.allFinite()) throw GradientOverflowError("w_update", "non-finite gradient in w_update");
    if (!w_cand.allFinite()) throw GradientOverflowError("w_cand", "non-finite gradient in w_cand");
    if (!w_head.allFinite()) throw GradientOverflowError("w_head", "non-finite gradient in w_head");
    if (!b_reset.allFinite()) throw GradientOverflowError("b_reset", "non-finite gradient in b_reset");
    if (!b_update.allFinite()) throw GradientOverflowError("b_update", "non-finite gradient in b_update");
    if (!b_cand.allFinite()) throw GradientOverflowError("b_cand", "non-finite gradient in b_cand");
    if (!b_head.allFinite()) throw GradientOverflowError("b_head", "non-finite gradient in b_head");
}

Eigen::VectorXd head_backward(const GruModel& model, const Eigen::VectorXd& hidden,
                              const Eigen::VectorXd& bar_theta,
                              const Eigen::VectorXd& bar_shifts, GruGradients& grads) {
    Eigen::VectorXd bar_out(model.n_coeff + model.n_shift);
    bar_out.head(model.n_coeff) = bar_theta;
    for (int i = 0; i < model.n_coeff; ++i)
        if (!model.active[static_cast<std::size_t>(i)]) bar_out(i) = 0.0;
    bar_out.tail(model.n_shift) = bar_shifts;
    grads.w_head += bar_out * hidden.transpose();
    grads.b_head += bar_out;
    return model.w_head.transpose() * bar_out;
}

void gru_backward(const GruModel& model, const std::vector<GruCellCache>& caches,
                  const Eigen::VectorXd& bar_hidden, GruGradients& grads) {
    const Eigen::Index v = model.hidden_size;
    const Eigen::Index in = model.input_size;
    Eigen::VectorXd bar_a = bar_hidden;
    for (auto it = caches.rbegin(); it != caches.rend(); ++it) {
        const GruCellCache& c = *it;
        // a = z.cc + (1-z).a_prev
        const Eigen::VectorXd bar_cc = bar_a.cwiseProduct(c.z);
        const Eigen::VectorXd bar_z = bar_a.cwiseProduct(c.cc - c.a_prev);
        Eigen::VectorXd bar_a_prev = bar_a.cwiseProduct(Eigen::VectorXd::Ones(v) - c.z);

        // cc = tanh(W_a [r.a_prev; x] + b_a)
        const Eigen::VectorXd bar_pre_cc =
            bar_cc.cwiseProduct(Eigen::VectorXd::Ones(v) - c.cc.cwiseProduct(c.cc));
        Eigen::VectorXd gated(v + in);
        gated.head(v) = c.r.cwiseProduct(c.a_prev);
        gated.tail(in) = c.x;
        grads.w_cand += bar_pre_cc * gated.transpose();
        grads.b_cand += bar_pre_cc;
        const Eigen::VectorXd bar_gated = model.w_cand.transpose() * bar_pre_cc;
        const Eigen::VectorXd bar_r = bar_gated.head(v).cwiseProduct(c.a_prev);
        bar_a_prev += bar_gated.head(v).cwiseProduct(c.r);

        // gates: r = sigma(W_r concat + b_r), z likewise
        const Eigen::VectorXd bar_pre_r =
            bar_r.cwiseProduct(c.r.cwiseProduct(Eigen::VectorXd::Ones(v) - c.r));
        const Eigen::VectorXd bar_pre_z =
            bar_z.cwiseProduct(c.z.cwiseProduct(Eigen::VectorXd::Ones(v) - c.z));
        Eigen::VectorXd concat(v + in);
        concat.head(v) = c.a_prev;
        concat.tail(in) = c.x;
        grads.w_reset += bar_pre_r * concat.transpose();
        grads.b_reset += bar_pre_r;
        grads.w_update += bar_pre_z * concat.transpose();
        grads.b_update += bar_pre_z;
        const Eigen::VectorXd bar_concat = model.w_reset.transpose() * bar_pre_r +
                                           model.w_update.transpose() * bar_pre_z;
        bar_a_prev += bar_concat.head(v);

        bar_a = bar_a_prev;
    }
}

}  // namespace merinda
