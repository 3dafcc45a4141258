#include <cmath>
#include <sstream>

#include "doctest.h"
#include "scoreland/rng.hpp"
#include "scoreland/teacher.hpp"

using namespace scoreland;

namespace {

TeacherNet identity_teacher(int d, Activation g, double noise = 0.0) {
    TeacherNet t;
    t.w_star = Vector::Ones(d);
    t.a_star = Matrix::Identity(d, d);
    t.activation = g;
    t.noise_std = noise;
    return t;
}

}  // namespace

TEST_SUITE("teacher") {

TEST_CASE("gaussian sample mean obeys the CLT bound") {
    const int n = 100000;
    const Matrix X = sample_input(Gaussian{2}, n, 51);
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(X.col(j).mean()) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("symmetric exponential first absolute moment is one") {
    const int n = 100000;
    const Matrix X = sample_input(SymmetricExponential{2}, n, 52);
    for (int j = 0; j < 2; ++j) {
        const double mean_abs = X.col(j).cwiseAbs().mean();
        CHECK(std::abs(mean_abs - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("mixture samples center on the blended mean") {
    GaussianMixture mix;
    mix.mu1 = Vector::Constant(2, 1.0);
    mix.mu2 = Vector::Constant(2, -1.0);
    mix.weight = 0.75;
    const int n = 100000;
    const Matrix X = sample_input(mix, n, 53);
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(X.col(j).mean() - 0.5) < 8.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sampling is bit-identical under a fixed seed") {
    const Matrix a = sample_input(Gaussian{3}, 64, 54);
    const Matrix b = sample_input(Gaussian{3}, 64, 54);
    CHECK((a - b).norm() == 0.0);
    const Matrix c = sample_input(Gaussian{3}, 64, 55);
    CHECK((a - c).norm() != 0.0);
}

TEST_CASE("relu teacher label by hand") {
    TeacherNet t;
    t.w_star = Vector::Ones(1);
    t.a_star = Matrix(1, 2);
    t.a_star << 1, 0;
    t.activation = Activation::ReLU;

    Matrix X(2, 2);
    X << 2, -1, -2, 5;
    const Vector y = generate(t, X, 0);
    CHECK(y(0) == doctest::Approx(2.0));
    CHECK(y(1) == doctest::Approx(0.0));  // dead region
}

TEST_CASE("labels match the naive per-sample loop") {
    Rng rng(56);
    TeacherNet t;
    t.w_star = Vector(2);
    t.w_star << 1.3, -0.7;
    t.a_star = Matrix(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) t.a_star(i, j) = rng.normal();
    t.activation = Activation::Softplus;

    const Matrix X = sample_input(Gaussian{3}, 32, 57);
    const Vector y = generate(t, X, 0);
    for (int s = 0; s < 32; ++s) {
        double expect = 0.0;
        for (int i = 0; i < 2; ++i)
            expect += t.w_star(i) * activate(t.activation, t.a_star.row(i).dot(X.row(s)));
        CHECK(y(s) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("noiseless labels are a pure function of X; noise is seeded") {
    const TeacherNet t = identity_teacher(2, Activation::ReLU);
    const Matrix X = sample_input(Gaussian{2}, 16, 58);
    CHECK((generate(t, X, 1) - generate(t, X, 2)).norm() == 0.0);

    TeacherNet noisy = t;
    noisy.noise_std = 0.5;
    const Vector y1 = generate(noisy, X, 1);
    const Vector y2 = generate(noisy, X, 1);
    const Vector y3 = generate(noisy, X, 2);
    CHECK((y1 - y2).norm() == 0.0);
    CHECK((y1 - y3).norm() != 0.0);
}

TEST_CASE("quartic activation kappa is exactly 24 w") {
    TeacherNet t = identity_teacher(3, Activation::Quartic);
    t.w_star << 1.0, -2.0, 0.5;
    const TeacherStats stats = estimate_kappa(t, Gaussian{3}, 10000, 59);
    for (int i = 0; i < 3; ++i) {
        CHECK(stats.kappa(i) == doctest::Approx(24.0 * t.w_star(i)));
        CHECK(stats.kappa_se(i) == doctest::Approx(0.0));
    }
}

TEST_CASE("softplus kappa is stable across seeds") {
    TeacherNet t;
    t.w_star = Vector::Ones(1);
    t.a_star = Matrix(1, 2);
    t.a_star << 1, 0;
    t.activation = Activation::Softplus;

    const TeacherStats a = estimate_kappa(t, Gaussian{2}, 200000, 60);
    const TeacherStats b = estimate_kappa(t, Gaussian{2}, 200000, 61);
    const double se = std::hypot(a.kappa_se(0), b.kappa_se(0));
    CHECK(std::abs(a.kappa(0) - b.kappa(0)) < 3.0 * se);
}

TEST_CASE("zero teacher weights give zero kappa") {
    TeacherNet t = identity_teacher(2, Activation::Softplus);
    t.w_star.setZero();
    const TeacherStats stats = estimate_kappa(t, Gaussian{2}, 10000, 62);
    CHECK(stats.kappa.norm() == 0.0);
}

TEST_CASE("kappa estimation rejects relu and tiny Monte Carlo budgets") {
    const TeacherNet t = identity_teacher(2, Activation::ReLU);
    CHECK_THROWS_AS(estimate_kappa(t, Gaussian{2}, 10000, 63), NonSmoothActivation);
    TeacherNet s = identity_teacher(2, Activation::Quartic);
    CHECK_THROWS_AS(estimate_kappa(s, Gaussian{2}, 100, 63), ConfigError);
}

TEST_CASE("dataset CSV round-trips at full precision") {
    TeacherNet t = identity_teacher(2, Activation::ReLU, 0.25);
    const Dataset data = make_dataset(t, Gaussian{2}, 17, 64);

    std::stringstream ss;
    write_dataset_csv(data, ss);
    const std::string text = ss.str();
    CHECK(text.substr(0, text.find('\n')) == "x_0,x_1,y");

    std::stringstream in(text);
    const Dataset back = read_dataset_csv(in);
    CHECK((back.X - data.X).norm() == 0.0);
    CHECK((back.y - data.y).norm() == 0.0);
}

TEST_CASE("activation derivatives are consistent with finite differences") {
    Rng rng(65);
    for (Activation g : {Activation::Softplus, Activation::Quartic}) {
        for (int trial = 0; trial < 5; ++trial) {
            const double t = 2.0 * rng.normal();
            const double fd =
                (activate(g, t + 1e-6) - activate(g, t - 1e-6)) / 2e-6;
            CHECK(activate_grad(g, t) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

}  // TEST_SUITE
