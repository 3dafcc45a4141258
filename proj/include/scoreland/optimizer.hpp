#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "scoreland/common.hpp"
#include "scoreland/loss.hpp"

namespace scoreland {

// Plain full-batch gradient descent / mini-batch SGD. No momentum, no
// schedules; the landscape results are about what vanilla SGD can do.
struct TrainConfig {
    double learning_rate = 1e-3;
    int iterations = 1000;
    int batch_size = 0;       // 0 = full batch; otherwise uniform resampling
    int dataset_size = 0;     // required when batch_size > 0; batch_size <= n
    std::uint64_t seed = 0;   // drives the mini-batch stream
    int record_every = 1;
};

struct TrajectoryPoint {
    int iteration = 0;
    double loss = 0.0;
    double param_error = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    Matrix final_iterate;

    double final_param_error() const {
        return points.empty() ? 0.0 : points.back().param_error;
    }
};

// CSV: iter,loss,param_error
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

struct StepCallbacks {
    // Loss and gradient at A over the given batch (empty span = full batch).
    std::function<LossGrad(const Matrix& A, const std::vector<int>& batch)> loss_grad;
    // Recorded metric, e.g. param_error against the teacher.
    std::function<double(const Matrix& A)> metric;
    // Optional per-iteration hook (runs before the gradient evaluation).
    std::function<void(int iteration, const Matrix& A)> on_step;
};

// Rows i.i.d. uniform on the unit sphere; deterministic given seed.
Matrix random_init(int k, int d, std::uint64_t seed);

// A <- A - eta * grad. Records (iteration, loss, metric) every record_every
// steps plus the final iterate. Throws NonFiniteLoss (with the iteration
// index) if the loss or gradient stops being finite.
Trajectory train(const StepCallbacks& callbacks, Matrix init, const TrainConfig& cfg);

}  // namespace scoreland
