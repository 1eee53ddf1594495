// Micro-benchmark for the two OpenMP-parallel kernels: polynomial library
// evaluation (row-parallel) and windowed GRU training (per-window batch
// gradients). Each kernel is timed serial vs parallel and the outputs are
// checked bitwise identical, since determinism across thread counts is a
// library guarantee, not just a test.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "merinda/library.hpp"
#include "merinda/systems.hpp"
#include "merinda/train.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_row(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   bitwise %s\n",
                name, serial_s * 1e3, parallel_s * 1e3,
                parallel_s > 0 ? serial_s / parallel_s : 0.0,
                identical ? "OK" : "MISMATCH");
}

void bench_library(int repeats) {
    using namespace merinda;
    const PolynomialLibrary lib = build_library(5, 3);  // 56 terms
    std::mt19937_64 rng(42);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd points(20000, 5);
    for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = dist(rng);

    Eigen::MatrixXd serial_out, parallel_out;
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) serial_out = lib.evaluate_serial(points);
    const double serial_s = seconds_since(t0) / repeats;

    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) parallel_out = lib.evaluate(points);
    const double parallel_s = seconds_since(t0) / repeats;

    const bool identical = (serial_out - parallel_out).cwiseAbs().maxCoeff() == 0.0;
    print_row("library evaluate (20k x 56)", serial_s, parallel_s, identical);
}

void bench_training(int epochs) {
    using namespace merinda;
    const Trajectory data = simulate_system(catalog_system("lotka"), 0.05, 400);
    const PolynomialLibrary lib = build_library(2, 2);
    TrainConfig config;
    config.epochs = epochs;
    config.prune_epoch = epochs + 1;  // keep the full head active while timing
    config.window_length = 20;
    config.window_stride = 5;
    config.batch_size = 16;
    config.hidden_size = 16;
    config.seed = 7;

    config.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const RecoveryResult serial = train(data, lib, config);
    const double serial_s = seconds_since(t0) / epochs;

    config.parallel = true;
    t0 = std::chrono::steady_clock::now();
    const RecoveryResult parallel = train(data, lib, config);
    const double parallel_s = seconds_since(t0) / epochs;

    bool identical =
        (serial.coefficients.values - parallel.coefficients.values).cwiseAbs().maxCoeff() == 0.0;
    for (std::size_t i = 0; i < serial.loss_history.size(); ++i)
        identical = identical && serial.loss_history[i] == parallel.loss_history[i];
    print_row("train epoch (per-window BPTT)", serial_s, parallel_s, identical);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run serial code\n");
#endif
    bench_library(20);
    bench_training(30);
    return 0;
}
