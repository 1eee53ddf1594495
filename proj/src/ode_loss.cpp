#include "merinda/ode_loss.hpp"

#include <cmath>
#include <vector>

#include "merinda/integrate.hpp"

namespace merinda {

namespace {

struct StepCache {
    // stage points s1..s4 (library variable vectors) and stage slopes
    Eigen::VectorXd s[4];
    Eigen::VectorXd k[4];
};

bool bad(const Eigen::VectorXd& v) {
    return !v.allFinite() || v.cwiseAbs().maxCoeff() > kDivergenceGuard;
}

}  // namespace

OdeLossValue ode_loss(const PolynomialLibrary& library, const Eigen::MatrixXd& theta,
                      const Eigen::VectorXd& shifts, const Eigen::MatrixXd& window_states,
                      const Eigen::MatrixXd& window_inputs, double h) {
    const Eigen::Index k_len = window_states.rows();
    const Eigen::Index n = window_states.cols();
    const Eigen::Index m = shifts.size();
    if (k_len < 2) throw std::invalid_argument("ode_loss window needs >= 2 samples");
    if (library.n_vars != n + m)
        throw std::invalid_argument("library variables must equal states + shift channels");

    OdeLossValue out;
    Eigen::VectorXd y = window_states.row(0).transpose();
    Eigen::VectorXd v(n + m);
    double sq_sum = 0.0;
    for (Eigen::Index t = 0; t + 1 < k_len; ++t) {
        auto field_at = [&](const Eigen::VectorXd& state) {
            v.head(n) = state;
            if (m > 0) v.tail(m) = window_inputs.row(t).transpose().head(m) + shifts;
            return Eigen::VectorXd(theta * library.eval_point(v));
        };
        const Eigen::VectorXd k1 = field_at(y);
        const Eigen::VectorXd k2 = field_at(y + 0.5 * h * k1);
        const Eigen::VectorXd k3 = field_at(y + 0.5 * h * k2);
        const Eigen::VectorXd k4 = field_at(y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (bad(y)) {
            out.loss = kClippedLoss;
            out.diverged = true;
            return out;
        }
        sq_sum += (y - window_states.row(t + 1).transpose()).squaredNorm();
    }
    out.loss = sq_sum / static_cast<double>(k_len * n);
    return out;
}

OdeLossValue ode_loss(const CoefficientMatrix& coeffs, const Eigen::VectorXd& shifts,
                      const Trajectory& window) {
    return ode_loss(coeffs.library, coeffs.values, shifts, window.states, window.inputs,
                    window.step());
}

OdeLossValue ode_loss_with_grad(const PolynomialLibrary& library, const Eigen::MatrixXd& theta,
                                const Eigen::VectorXd& shifts,
                                const Eigen::MatrixXd& window_states,
                                const Eigen::MatrixXd& window_inputs, double h,
                                Eigen::MatrixXd& grad_theta, Eigen::VectorXd& grad_shifts) {
    const Eigen::Index k_len = window_states.rows();
    const Eigen::Index n = window_states.cols();
    const Eigen::Index m = shifts.size();
    if (k_len < 2) throw std::invalid_argument("ode_loss window needs >= 2 samples");
    if (library.n_vars != n + m)
        throw std::invalid_argument("library variables must equal states + shift channels");

    grad_theta = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    grad_shifts = Eigen::VectorXd::Zero(m);

    OdeLossValue out;
    const Eigen::Index steps = k_len - 1;
    std::vector<StepCache> cache(static_cast<std::size_t>(steps));
    std::vector<Eigen::VectorXd> traj(static_cast<std::size_t>(k_len));
    traj[0] = window_states.row(0).transpose();

    // forward, recording every stage point in library coordinates
    Eigen::VectorXd v(n + m);
    double sq_sum = 0.0;
    for (Eigen::Index t = 0; t < steps; ++t) {
        StepCache& sc = cache[static_cast<std::size_t>(t)];
        Eigen::VectorXd u_shifted(m);
        if (m > 0) u_shifted = window_inputs.row(t).transpose().head(m) + shifts;
        auto stage = [&](int idx, const Eigen::VectorXd& state) {
            v.head(n) = state;
            if (m > 0) v.tail(m) = u_shifted;
            sc.s[idx] = v;
            sc.k[idx] = theta * library.eval_point(v);
        };
        const Eigen::VectorXd& y = traj[static_cast<std::size_t>(t)];
        stage(0, y);
        stage(1, y + 0.5 * h * sc.k[0]);
        stage(2, y + 0.5 * h * sc.k[1]);
        stage(3, y + h * sc.k[2]);
        Eigen::VectorXd next =
            y + (h / 6.0) * (sc.k[0] + 2.0 * sc.k[1] + 2.0 * sc.k[2] + sc.k[3]);
        if (bad(next)) {
            out.loss = kClippedLoss;
            out.diverged = true;
            grad_theta.setZero();
            grad_shifts.setZero();
            return out;
        }
        sq_sum += (next - window_states.row(t + 1).transpose()).squaredNorm();
        traj[static_cast<std::size_t>(t + 1)] = std::move(next);
    }
    const double scale = 2.0 / static_cast<double>(k_len * n);
    out.loss = sq_sum / static_cast<double>(k_len * n);

    // reverse pass through each RK4 stage
    Eigen::VectorXd bar_y =
        scale * (traj[static_cast<std::size_t>(steps)] -
                 window_states.row(steps).transpose());
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
        const StepCache& sc = cache[static_cast<std::size_t>(t)];
        const Eigen::VectorXd g = bar_y;  // adjoint of y_{t+1}
        Eigen::VectorXd bar_k[4] = {(h / 6.0) * g, (h / 3.0) * g, (h / 3.0) * g,
                                    (h / 6.0) * g};
        Eigen::VectorXd bar_state = g;
        // stages unwind 4 -> 1; stage i's point depends on slope i-1
        const double stage_h[4] = {0.0, 0.5 * h, 0.5 * h, h};
        for (int i = 3; i >= 0; --i) {
            const Eigen::VectorXd phi = library.eval_point(sc.s[i]);
            const Eigen::MatrixXd jac = library.eval_jacobian(sc.s[i]);
            grad_theta.noalias() += bar_k[i] * phi.transpose();
            const Eigen::VectorXd bar_v = jac.transpose() * (theta.transpose() * bar_k[i]);
            bar_state += bar_v.head(n);
            if (m > 0) grad_shifts += bar_v.tail(m);
            if (i > 0) bar_k[i - 1] += stage_h[i] * bar_v.head(n);
        }
        bar_y = bar_state;
        if (t > 0)
            bar_y += scale * (traj[static_cast<std::size_t>(t)] -
                              window_states.row(t).transpose());
    }
    return out;
}

}  // namespace merinda
