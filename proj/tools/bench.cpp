// Benchmarks the OpenMP kernels against their serial counterparts and the
// dense-tensor reference path. Usage: bench [repeats]

#include <chrono>
#include <cstdio>
#include <functional>

#include "scoreland/experiments.hpp"
#include "scoreland/parallel.hpp"

using namespace scoreland;
using clock_type = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
    fn();  // warm up
    const auto start = clock_type::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto stop = clock_type::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-34s serial %9.2f ms   openmp %9.2f ms   speedup %.2fx\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    par::apply_thread_cap();
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
    std::printf("threads: %d, repeats: %d\n", par::max_threads(), repeats);

    // loss + gradient over samples, Laplace scores (the race workload)
    {
        ExperimentConfig cfg;
        cfg.dist_name = "laplace";
        cfg.dim = 10;
        cfg.neurons = 10;
        cfg.activation = "relu";
        const InputDistribution dist = make_distribution(cfg);
        const TeacherNet teacher = make_teacher(cfg);
        const Dataset data = make_dataset(teacher, dist, 8192, 1);
        const ScoreBatch scores = ScoreBatch::analytic(dist, data.X);
        const Matrix A = random_init(10, 10, 2);
        const LossConfig loss_cfg{30.0, 1000.0, -1.0};

        const double serial = time_ms(
            [&] { landscape_loss_grad(A, data, scores, loss_cfg, false); }, repeats * 10);
        const double parallel = time_ms(
            [&] { landscape_loss_grad(A, data, scores, loss_cfg, true); }, repeats * 10);
        report("loss+grad laplace d=10 n=8192", serial, parallel);
    }

    // loss + gradient with gaussian-form scores
    {
        ExperimentConfig cfg;
        cfg.dist_name = "gaussian";
        cfg.dim = 16;
        cfg.neurons = 16;
        cfg.activation = "relu";
        const InputDistribution dist = make_distribution(cfg);
        const TeacherNet teacher = make_teacher(cfg);
        const Dataset data = make_dataset(teacher, dist, 8192, 3);
        const ScoreBatch scores = ScoreBatch::analytic(dist, data.X);
        const Matrix A = random_init(16, 16, 4);
        const LossConfig loss_cfg{30.0, 1000.0, -1.0};

        const double serial = time_ms(
            [&] { landscape_loss_grad(A, data, scores, loss_cfg, false); }, repeats * 5);
        const double parallel = time_ms(
            [&] { landscape_loss_grad(A, data, scores, loss_cfg, true); }, repeats * 5);
        report("loss+grad gaussian d=16 n=8192", serial, parallel);
    }

    // batch local fits (the estimated-score pipeline)
    {
        const Matrix X = sample_input(Gaussian{2}, 2048, 5);
        EstimatorConfig est;
        est.bandwidth = 0.8;
        const double serial =
            time_ms([&] { batch_local_fits(X, X, est, false); }, repeats);
        const double parallel =
            time_ms([&] { batch_local_fits(X, X, est, true); }, repeats);
        report("llsfe batch fits d=2 n=2048", serial, parallel);
    }

    // structured kernel vs the dense-tensor reference route
    {
        ExperimentConfig cfg;
        cfg.dist_name = "mixture";
        cfg.dim = 6;
        cfg.neurons = 6;
        cfg.activation = "relu";
        const InputDistribution dist = make_distribution(cfg);
        const TeacherNet teacher = make_teacher(cfg);
        const Dataset data = make_dataset(teacher, dist, 512, 6);
        const ScoreBatch scores = ScoreBatch::analytic(dist, data.X);
        const Matrix A = random_init(6, 6, 7);
        const LossConfig loss_cfg{30.0, 1000.0, -1.0};

        const double structured = time_ms(
            [&] { landscape_loss(A, data, scores, loss_cfg, false); }, repeats);
        const double reference = time_ms(
            [&] { landscape_loss_reference(A, data, scores, loss_cfg); }, repeats);
        std::printf("%-34s structured %6.2f ms  dense-ref %9.2f ms   ratio %.0fx\n",
                    "loss value mixture d=6 n=512", structured, reference,
                    reference / structured);
    }
    return 0;
}
