#include <cmath>
#include <sstream>

#include "doctest.h"
#include "scoreland/optimizer.hpp"
#include "scoreland/rng.hpp"

using namespace scoreland;

namespace {

// f(A) = ||A - A0||_F^2, gradient 2(A - A0): a convex sanity case.
StepCallbacks bowl_callbacks(const Matrix& A0) {
    StepCallbacks cb;
    cb.loss_grad = [A0](const Matrix& A, const std::vector<int>&) {
        LossGrad lg;
        lg.value = (A - A0).squaredNorm();
        lg.grad = 2.0 * (A - A0);
        return lg;
    };
    cb.metric = [A0](const Matrix& A) { return (A - A0).norm(); };
    return cb;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("random init rows live on the unit sphere") {
    const Matrix A = random_init(6, 9, 111);
    for (int i = 0; i < 6; ++i)
        CHECK(A.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(random_init(4, 3, 111), ConfigError);
}

TEST_CASE("random init is seed-deterministic") {
    const Matrix a = random_init(3, 5, 112);
    const Matrix b = random_init(3, 5, 112);
    const Matrix c = random_init(3, 5, 113);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() != 0.0);
}

TEST_CASE("row directions cover the sphere symmetrically") {
    const int draws = 10000;
    const int d = 4;
    Vector mean = Vector::Zero(d);
    for (int t = 0; t < draws; ++t)
        mean += random_init(1, d, derive_seed(114, static_cast<std::uint64_t>(t))).row(0).transpose();
    mean /= static_cast<double>(draws);
    for (int j = 0; j < d; ++j)
        CHECK(std::abs(mean(j)) < 5.0 / std::sqrt(static_cast<double>(draws * d)));
}

TEST_CASE("geometric convergence on a quadratic bowl") {
    Rng rng(115);
    Matrix A0(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) A0(i, j) = rng.normal();

    TrainConfig cfg;
    cfg.learning_rate = 0.25;  // contraction factor 1 - 2*eta = 0.5
    cfg.iterations = 40;
    cfg.record_every = 1;
    const Trajectory traj = train(bowl_callbacks(A0), Matrix::Zero(2, 3), cfg);
    CHECK((traj.final_iterate - A0).norm() < 1e-10);
    // each step halves the distance
    for (std::size_t p = 1; p + 1 < traj.points.size(); ++p)
        CHECK(traj.points[p].param_error ==
              doctest::Approx(0.5 * traj.points[p - 1].param_error).epsilon(1e-9));
}

TEST_CASE("zero learning rate leaves the trajectory at the init") {
    const Matrix A0 = Matrix::Ones(2, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.iterations = 10;
    cfg.record_every = 5;
    const Trajectory traj = train(bowl_callbacks(A0), Matrix::Zero(2, 2), cfg);
    for (const auto& p : traj.points)
        CHECK(p.param_error == doctest::Approx(A0.norm()));
    CHECK(traj.final_iterate.norm() == 0.0);
}

TEST_CASE("a zero-iteration run records only the init row") {
    const Matrix A0 = Matrix::Ones(2, 2);
    TrainConfig cfg;
    cfg.iterations = 0;
    const Trajectory traj = train(bowl_callbacks(A0), Matrix::Zero(2, 2), cfg);
    REQUIRE(traj.points.size() == 1);
    CHECK(traj.points[0].iteration == 0);
}

TEST_CASE("one step moves by exactly minus eta times the gradient") {
    const Matrix A0 = Matrix::Ones(2, 2);
    const Matrix init = Matrix::Zero(2, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.iterations = 1;
    const Trajectory traj = train(bowl_callbacks(A0), init, cfg);
    const Matrix expected = init - 0.1 * (2.0 * (init - A0));
    CHECK((traj.final_iterate - expected).norm() == 0.0);
}

TEST_CASE("divergence raises NonFiniteLoss with the iteration index") {
    const Matrix A0 = Matrix::Zero(1, 1);
    StepCallbacks cb;
    cb.loss_grad = [](const Matrix& A, const std::vector<int>&) {
        LossGrad lg;
        lg.value = std::exp(A(0, 0));  // explodes fast
        lg.grad = Matrix::Constant(1, 1, -std::exp(2.0 * A(0, 0)));
        return lg;
    };
    cb.metric = [](const Matrix&) { return 0.0; };
    TrainConfig cfg;
    cfg.learning_rate = 10.0;
    cfg.iterations = 100000;
    Matrix init = Matrix::Constant(1, 1, 1.0);
    CHECK_THROWS_AS(train(cb, init, cfg), NonFiniteLoss);
    (void)A0;
}

TEST_CASE("recording schedule and strict index growth") {
    const Matrix A0 = Matrix::Ones(1, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.iterations = 10;
    cfg.record_every = 4;
    const Trajectory traj = train(bowl_callbacks(A0), Matrix::Zero(1, 2), cfg);
    REQUIRE(traj.points.size() == 4);  // 0, 4, 8, final 10
    CHECK(traj.points[0].iteration == 0);
    CHECK(traj.points[1].iteration == 4);
    CHECK(traj.points[2].iteration == 8);
    CHECK(traj.points[3].iteration == 10);
    for (std::size_t p = 1; p < traj.points.size(); ++p)
        CHECK(traj.points[p].iteration > traj.points[p - 1].iteration);
}

TEST_CASE("mini-batch draws are deterministic and respect the dataset size") {
    std::vector<std::vector<int>> seen_a, seen_b;
    auto run = [&](std::vector<std::vector<int>>& sink) {
        StepCallbacks cb;
        cb.loss_grad = [&sink](const Matrix& A, const std::vector<int>& batch) {
            if (!batch.empty()) sink.push_back(batch);
            LossGrad lg;
            lg.value = 0.0;
            lg.grad = Matrix::Zero(A.rows(), A.cols());
            return lg;
        };
        cb.metric = [](const Matrix&) { return 0.0; };
        TrainConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.iterations = 5;
        cfg.batch_size = 7;
        cfg.dataset_size = 32;
        cfg.seed = 909;
        train(cb, Matrix::Zero(1, 1), cfg);
    };
    run(seen_a);
    run(seen_b);
    REQUIRE(seen_a.size() == 5);
    CHECK(seen_a == seen_b);
    for (const auto& batch : seen_a) {
        CHECK(batch.size() == 7);
        for (int idx : batch) {
            CHECK(idx >= 0);
            CHECK(idx < 32);
        }
    }

    // batch_size > dataset_size is a config error
    TrainConfig bad;
    bad.batch_size = 64;
    bad.dataset_size = 8;
    StepCallbacks cb;
    cb.loss_grad = [](const Matrix& A, const std::vector<int>&) {
        return LossGrad{0.0, Matrix::Zero(A.rows(), A.cols())};
    };
    cb.metric = [](const Matrix&) { return 0.0; };
    Matrix init = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(train(cb, init, bad), ConfigError);
}

TEST_CASE("trajectory CSV carries the header and rows") {
    const Matrix A0 = Matrix::Ones(1, 1);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.iterations = 2;
    const Trajectory traj = train(bowl_callbacks(A0), Matrix::Zero(1, 1), cfg);
    std::stringstream ss;
    write_trajectory_csv(traj, ss);
    const std::string text = ss.str();
    CHECK(text.rfind("iter,loss,param_error\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          static_cast<long>(traj.points.size()) + 1);
}

}  // TEST_SUITE
