#include "scoreland/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "scoreland/rng.hpp"

namespace scoreland {

Matrix random_init(int k, int d, std::uint64_t seed) {
    if (k > d) throw ConfigError("random_init requires k <= d");
    Matrix A(k, d);
    Rng rng(seed);
    for (int i = 0; i < k; ++i) {
        double norm2 = 0.0;
        do {
            for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
            norm2 = A.row(i).squaredNorm();
        } while (norm2 == 0.0);
        A.row(i) /= std::sqrt(norm2);
    }
    return A;
}

Trajectory train(const StepCallbacks& callbacks, Matrix init, const TrainConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
    if (cfg.iterations < 0) throw ConfigError("iteration count must be >= 0");
    if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");

    if (cfg.batch_size > 0 &&
        (cfg.dataset_size < cfg.batch_size || cfg.dataset_size < 1))
        throw ConfigError("mini-batch training requires batch_size <= dataset_size");

    Trajectory traj;
    Matrix A = std::move(init);
    Rng batch_rng(derive_seed(cfg.seed, 0x6261746368ULL));  // "batch" stream

    std::vector<int> batch;
    for (int it = 0; it < cfg.iterations; ++it) {
        if (callbacks.on_step) callbacks.on_step(it, A);
        batch.clear();
        if (cfg.batch_size > 0) {
            // Uniform resampling with replacement from the seeded stream.
            batch.reserve(static_cast<std::size_t>(cfg.batch_size));
            for (int b = 0; b < cfg.batch_size; ++b)
                batch.push_back(static_cast<int>(
                    batch_rng.below(static_cast<std::uint64_t>(cfg.dataset_size))));
        }
        const LossGrad lg = callbacks.loss_grad(A, batch);
        if (!std::isfinite(lg.value) || !lg.grad.allFinite())
            throw NonFiniteLoss("loss or gradient became non-finite (learning rate too "
                                "large?) at iteration " + std::to_string(it), it);
        if (it % cfg.record_every == 0)
            traj.points.push_back({it, lg.value, callbacks.metric(A)});
        A.noalias() -= cfg.learning_rate * lg.grad;
    }

    // Always record the final iterate (for iterations == 0 this is the init row).
    const LossGrad lg = callbacks.loss_grad(A, {});
    if (!std::isfinite(lg.value))
        throw NonFiniteLoss("final loss evaluation is non-finite", cfg.iterations);
    traj.points.push_back({cfg.iterations, lg.value, callbacks.metric(A)});
    traj.final_iterate = std::move(A);
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "iter,loss,param_error\n";
    char buf[96];
    for (const auto& p : traj.points) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.iteration, p.loss,
                      p.param_error);
        out << buf;
    }
}

}  // namespace scoreland
