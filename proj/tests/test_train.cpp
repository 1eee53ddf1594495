#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <numeric>

#include "merinda/errors.hpp"
#include "merinda/systems.hpp"
#include "merinda/train.hpp"

using namespace merinda;

namespace {

Trajectory small_lotka() {
    return simulate_system(catalog_system("lotka"), 0.05, 200);
}

TrainConfig quick_config() {
    TrainConfig config;
    config.epochs = 60;
    config.prune_epoch = 30;
    config.target_sparsity = 4;
    config.window_length = 20;
    config.window_stride = 10;
    config.batch_size = 8;
    config.hidden_size = 8;
    config.learning_rate = 1e-2;
    config.final_learning_rate = 1e-3;
    config.seed = 7;
    return config;
}

}  // namespace

TEST_CASE("training drives the window loss down on clean predator-prey data") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    const RecoveryResult result = train(data, lib, quick_config());
    REQUIRE(result.loss_history.size() == 60);
    for (double loss : result.loss_history) CHECK(std::isfinite(loss));
    const double head = std::accumulate(result.loss_history.begin(),
                                        result.loss_history.begin() + 5, 0.0) / 5.0;
    const double tail = std::accumulate(result.loss_history.end() - 5,
                                        result.loss_history.end(), 0.0) / 5.0;
    CHECK(tail < head);
}

TEST_CASE("identical seed and config reproduce the run bit for bit") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    const TrainConfig config = quick_config();
    const RecoveryResult a = train(data, lib, config);
    const RecoveryResult b = train(data, lib, config);
    REQUIRE(a.loss_history.size() == b.loss_history.size());
    for (std::size_t i = 0; i < a.loss_history.size(); ++i)
        CHECK(a.loss_history[i] == b.loss_history[i]);
    CHECK((a.coefficients.values - b.coefficients.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parallel and serial training agree bitwise") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    TrainConfig config = quick_config();
    config.epochs = 20;
    config.parallel = true;
    const RecoveryResult par = train(data, lib, config);
    config.parallel = false;
    const RecoveryResult ser = train(data, lib, config);
    for (std::size_t i = 0; i < par.loss_history.size(); ++i)
        CHECK(par.loss_history[i] == ser.loss_history[i]);
    CHECK((par.coefficients.values - ser.coefficients.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pruning caps the recovered support at the sparsity target") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    const TrainConfig config = quick_config();
    const RecoveryResult result = train(data, lib, config);
    CHECK(result.model.active_count() == 4);
    CHECK(result.coefficients.support().size() <= 4);
}

TEST_CASE("sparsity target zero leaves the whole head active") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    TrainConfig config = quick_config();
    config.epochs = 10;
    config.target_sparsity = 0;
    const RecoveryResult result = train(data, lib, config);
    CHECK(result.model.active_count() == result.model.n_coeff);
}

TEST_CASE("checkpoint round trip restores the model and config") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    TrainConfig config = quick_config();
    config.epochs = 5;
    const RecoveryResult result = train(data, lib, config);
    const std::string path = "/tmp/merinda_ckpt_test.json";
    save_checkpoint(result, path);
    TrainConfig loaded_config;
    const GruModel back = load_checkpoint_model(path, &loaded_config);
    CHECK((back.w_head - result.model.w_head).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.w_cand - result.model.w_cand).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.active == result.model.active);
    CHECK(loaded_config.epochs == 5);
    CHECK(loaded_config.seed == config.seed);
    CHECK(loaded_config.hidden_size == config.hidden_size);
    std::remove(path.c_str());
}

TEST_CASE("data shorter than one window is rejected") {
    Trajectory tiny = small_lotka();
    tiny.times = tiny.times.head(10).eval();
    tiny.states = tiny.states.topRows(10).eval();
    tiny.inputs = tiny.inputs.topRows(10).eval();
    const PolynomialLibrary lib = build_library(2, 2);
    CHECK_THROWS_AS(train(tiny, lib, quick_config()), TooShortError);
}

TEST_CASE("train config JSON round trip") {
    TrainConfig config = quick_config();
    config.median_aggregation = true;
    config.solver_step = 0.025;
    const TrainConfig back = TrainConfig::from_json(config.to_json());
    CHECK(back.batch_size == config.batch_size);
    CHECK(back.window_length == config.window_length);
    CHECK(back.window_stride == config.window_stride);
    CHECK(back.epochs == config.epochs);
    CHECK(back.learning_rate == config.learning_rate);
    CHECK(back.final_learning_rate == config.final_learning_rate);
    CHECK(back.prune_epoch == config.prune_epoch);
    CHECK(back.target_sparsity == config.target_sparsity);
    CHECK(back.seed == config.seed);
    CHECK(back.solver_step == config.solver_step);
    CHECK(back.hidden_size == config.hidden_size);
    CHECK(back.grad_clip == config.grad_clip);
    CHECK(back.median_aggregation == config.median_aggregation);
}

TEST_CASE("median aggregation runs and stays within the mask") {
    const Trajectory data = small_lotka();
    const PolynomialLibrary lib = build_library(2, 2);
    TrainConfig config = quick_config();
    config.epochs = 40;  // past prune_epoch so the mask is in force
    config.median_aggregation = true;
    const RecoveryResult result = train(data, lib, config);
    CHECK(result.coefficients.support().size() <= 4);
    for (double loss : result.loss_history) CHECK(std::isfinite(loss));
}

TEST_CASE("catalog defaults exist for every system and pin the sparsity") {
    for (const auto& name : catalog_names()) {
        const TrainConfig config = default_train_config(name);
        CHECK(config.epochs > 0);
        CHECK(config.target_sparsity > 0);
        CHECK(config.prune_epoch < config.epochs);
        CHECK(config.final_learning_rate <= config.learning_rate);
    }
}

TEST_CASE("end-to-end scoring populates metrics against ground truth") {
    RecoverOptions options;
    options.config = quick_config();
    options.config.epochs = 40;
    options.config_overridden = true;
    options.epsilon = 1e9;  // structural check only; quality is gated elsewhere
    options.steps = 200;
    options.dt = 0.05;
    const RecoveryResult result = recover("lotka", options);
    CHECK(result.coefficient_mse >= 0.0);
    CHECK(result.support_precision >= 0.0);
    CHECK(result.support_precision <= 1.0);
    CHECK(result.support_recall >= 0.0);
    CHECK(result.support_recall <= 1.0);
    CHECK(result.pass);
    CHECK(std::isfinite(result.reconstruction_mse));
}
