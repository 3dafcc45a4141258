#include <cmath>
#include <vector>

#include "doctest.h"
#include "scoreland/rng.hpp"
#include "scoreland/tensor.hpp"

using namespace scoreland;

namespace {

Vector basis(int d, int i) {
    Vector e = Vector::Zero(d);
    e(i) = 1.0;
    return e;
}

Vector random_vec(Rng& rng, int d) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    return v;
}

Tensor random_tensor(Rng& rng, int order, int d) {
    Tensor t(order, d);
    for (double& e : t.entries()) e = rng.normal();
    return t;
}

// Largest eigenvalue of a symmetric 3x3 via the trigonometric closed form,
// used as an independent oracle for the power-iteration spectral norm.
double sym3_max_eigenvalue(const Matrix& B) {
    const double p1 = B(0, 1) * B(0, 1) + B(0, 2) * B(0, 2) + B(1, 2) * B(1, 2);
    const double q = B.trace() / 3.0;
    const double p2 = (B(0, 0) - q) * (B(0, 0) - q) + (B(1, 1) - q) * (B(1, 1) - q) +
                      (B(2, 2) - q) * (B(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    if (p == 0.0) return q;
    const Matrix C = (B - q * Matrix::Identity(3, 3)) / p;
    double r = C.determinant() / 2.0;
    r = std::max(-1.0, std::min(1.0, r));
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi);
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("outer of basis vectors has a single unit entry") {
    const Vector e1 = basis(2, 0);
    const Tensor t = outer({e1, e1, e1, e1});
    CHECK(t.order() == 4);
    CHECK(t.dim() == 2);
    CHECK(t.at({0, 0, 0, 0}) == 1.0);
    double sum = 0.0;
    for (double e : t.entries()) sum += std::abs(e);
    CHECK(sum == 1.0);
}

TEST_CASE("outer of a single vector is the vector") {
    Rng rng(1);
    const Vector x = random_vec(rng, 5);
    const Tensor t = outer({x});
    CHECK((t.to_vector() - x).norm() == 0.0);
}

TEST_CASE("outer matches the naive double loop") {
    Rng rng(2);
    const Vector u = random_vec(rng, 4), v = random_vec(rng, 4);
    const Tensor t = outer({u, v});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(t.at({i, j}) == doctest::Approx(u(i) * v(j)).epsilon(1e-14));
}

TEST_CASE("outer rejects mismatched dimensions") {
    CHECK_THROWS_AS(outer({Vector::Ones(2), Vector::Ones(3)}), DimensionError);
}

TEST_CASE("sym averages the two permutations of e1 x e2") {
    const Tensor t = sym(outer({basis(2, 0), basis(2, 1)}));
    CHECK(t.at({0, 1}) == doctest::Approx(0.5));
    CHECK(t.at({1, 0}) == doctest::Approx(0.5));
    CHECK(t.at({0, 0}) == 0.0);
    CHECK(t.at({1, 1}) == 0.0);
}

TEST_CASE("sym fixes symmetric tensors and is idempotent") {
    Rng rng(3);
    const Tensor t = random_tensor(rng, 4, 3);
    const Tensor s1 = sym(t);
    const Tensor s2 = sym(s1);
    for (std::size_t i = 0; i < s1.entries().size(); ++i)
        CHECK(s2.entries()[i] == doctest::Approx(s1.entries()[i]).epsilon(1e-13));

    // symmetric input: x^{x2} is already symmetric
    const Vector x = random_vec(rng, 3);
    const Tensor xx = outer({x, x});
    const Tensor sxx = sym(xx);
    for (std::size_t i = 0; i < xx.entries().size(); ++i)
        CHECK(sxx.entries()[i] == doctest::Approx(xx.entries()[i]).epsilon(1e-14));
}

TEST_CASE("symmetrized entries are invariant under index permutation") {
    Rng rng(4);
    const Tensor s = sym(random_tensor(rng, 3, 3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const double v = s.at({i, j, k});
                CHECK(s.at({j, i, k}) == doctest::Approx(v).epsilon(1e-14));
                CHECK(s.at({k, j, i}) == doctest::Approx(v).epsilon(1e-14));
            }
}

TEST_CASE("contract on matching basis vectors") {
    const Vector e1 = basis(3, 0);
    CHECK(contract(outer({e1, e1, e1, e1}), {e1, e1, e1, e1}) == doctest::Approx(1.0));
}

TEST_CASE("symmetrization is invisible under identical arguments") {
    Rng rng(5);
    const Tensor t = random_tensor(rng, 4, 3);
    const Vector u = random_vec(rng, 3);
    CHECK(contract(sym(t), {u, u, u, u}) ==
          doctest::Approx(contract(t, {u, u, u, u})).epsilon(1e-12));
}

TEST_CASE("contract of xx^T - I by hand") {
    const Vector x = basis(2, 0);
    const Vector u = basis(2, 1);
    const Tensor t = Tensor::from_matrix(x * x.transpose() - Matrix::Identity(2, 2));
    CHECK(contract(t, {u, u}) == doctest::Approx(-1.0));
}

TEST_CASE("contract rejects arity mismatch") {
    Rng rng(6);
    const Tensor t = random_tensor(rng, 3, 2);
    CHECK_THROWS_AS(contract(t, {Vector::Ones(2), Vector::Ones(2)}), DimensionError);
}

TEST_CASE("multilinearity: contract(outer(vs), ws) = prod <vs_j, ws_j>") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(4));
        const int d = 2 + static_cast<int>(rng.below(3));
        std::vector<Vector> vs, ws;
        double expected = 1.0;
        for (int j = 0; j < m; ++j) {
            vs.push_back(random_vec(rng, d));
            ws.push_back(random_vec(rng, d));
            expected *= vs.back().dot(ws.back());
        }
        CHECK(contract(outer(vs), ws) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("frobenius norm basics and loop oracle") {
    CHECK(frobenius_norm(Tensor(4, 2)) == 0.0);
    const Vector e1 = basis(2, 0);
    CHECK(frobenius_norm(outer({e1, e1, e1, e1})) == doctest::Approx(1.0));

    Rng rng(8);
    const Tensor t = random_tensor(rng, 3, 4);
    double ss = 0.0;
    for (double e : t.entries()) ss += e * e;
    CHECK(frobenius_norm(t) == doctest::Approx(std::sqrt(ss)).epsilon(1e-12));
}

TEST_CASE("sym contracts the frobenius norm") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor t = random_tensor(rng, 4, 3);
        CHECK(frobenius_norm(sym(t)) <= frobenius_norm(t) + 1e-12);
    }
}

TEST_CASE("spectral norm of simple matrices") {
    Matrix d(2, 2);
    d << 3, 0, 0, -5;
    CHECK(spectral_norm_matrix(Tensor::from_matrix(d)) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(spectral_norm_matrix(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral norm matches the characteristic-polynomial oracle") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
        const double expected = std::sqrt(sym3_max_eigenvalue(m.transpose() * m));
        CHECK(spectral_norm_matrix(m) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("spectral norm is bounded by the frobenius norm") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor t = random_tensor(rng, 2, 4);
        CHECK(spectral_norm_matrix(t) <= frobenius_norm(t) + 1e-9);
    }
}

TEST_CASE("spectral norm rejects non-matrices") {
    CHECK_THROWS_AS(spectral_norm_matrix(Tensor(4, 2)), DimensionError);
}

}  // TEST_SUITE
