#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "scoreland/distributions.hpp"
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

GaussianMixture sym_mixture(int d, double shift = 1.0, double p = 0.5) {
    GaussianMixture mix;
    mix.mu1 = Vector::Constant(d, shift);
    mix.mu2 = Vector::Constant(d, -shift);
    mix.weight = p;
    return mix;
}

// Monte Carlo check of E[g(x) S_m(x)] = E[grad^m g(x)] entrywise within
// 3 empirical standard errors; returns the worst |z|.
double stein_max_z(const InputDistribution& dist, int m,
                   const std::function<double(const Vector&)>& g,
                   const Tensor& expected_grad, int n, std::uint64_t seed) {
    const Matrix X = sample_input(dist, n, seed);
    const int d = static_cast<int>(X.cols());
    Tensor mean(m, d);
    Tensor msq(m, d);
    for (int s = 0; s < n; ++s) {
        const Vector x = X.row(s).transpose();
        const Tensor score = analytic_score(dist, m, x);
        const double gx = g(x);
        for (std::size_t e = 0; e < mean.entries().size(); ++e) {
            const double v = gx * score.entries()[e];
            mean.entries()[e] += v;
            msq.entries()[e] += v * v;
        }
    }
    double worst = 0.0;
    for (std::size_t e = 0; e < mean.entries().size(); ++e) {
        const double mu = mean.entries()[e] / n;
        const double var = msq.entries()[e] / n - mu * mu;
        const double se = std::sqrt(std::max(var, 1e-300) / n);
        worst = std::max(worst, std::abs(mu - expected_grad.entries()[e]) / se);
    }
    return worst;
}

// Central finite differences of the mixture density itself, with one
// Richardson step per axis so the truncation error is O(h^4). The requested
// mixed fourth derivative is built by composing per-axis stencils.
double fd_mixture_density_deriv(const GaussianMixture& mix, Vector x,
                                const std::vector<int>& axes, double h) {
    if (axes.empty()) return std::exp(log_density(InputDistribution(mix), x));
    std::vector<int> rest(axes.begin() + 1, axes.end());
    const int ax = axes.front();
    auto d1 = [&](double step) {
        Vector xp = x, xm = x;
        xp(ax) += step;
        xm(ax) -= step;
        return (fd_mixture_density_deriv(mix, xp, rest, h) -
                fd_mixture_density_deriv(mix, xm, rest, h)) /
               (2.0 * step);
    };
    const double coarse = d1(h);
    const double fine = d1(h / 2.0);
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

TEST_SUITE("scores") {

TEST_CASE("gaussian S2 at x = (1,0)") {
    Vector x(2);
    x << 1, 0;
    const Matrix s2 = gaussian_score(2, x).to_matrix();
    CHECK(s2(0, 0) == doctest::Approx(0.0));
    CHECK(s2(0, 1) == doctest::Approx(0.0));
    CHECK(s2(1, 0) == doctest::Approx(0.0));
    CHECK(s2(1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("gaussian S4 at the origin in one dimension is 3") {
    const Tensor s4 = gaussian_score(4, Vector::Zero(1));
    CHECK(s4.entries()[0] == doctest::Approx(3.0));
}

TEST_CASE("gaussian S1 is x and unsupported orders throw") {
    Rng rng(21);
    const Vector x = random_vec(rng, 3);
    CHECK((gaussian_score(1, x).to_vector() - x).norm() == 0.0);
    CHECK_THROWS_AS(gaussian_score(3, x), ConfigError);
}

TEST_CASE("quartic score entry formula agrees with the outer/sym route") {
    Rng rng(22);
    const int d = 3;
    const Vector a = random_vec(rng, d);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    m = Matrix(0.5 * (m + m.transpose()));

    // independent construction through the tensor module
    Tensor maa(4, d);
    Tensor mm(4, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    maa.at({i, j, k, l}) = m(i, j) * a(k) * a(l);
                    mm.at({i, j, k, l}) = m(i, j) * m(k, l);
                }
    const Tensor expected = outer({a, a, a, a}) + 6.0 * sym(maa) + 3.0 * sym(mm);
    const Tensor got = quartic_score_tensor(a, m);
    for (std::size_t e = 0; e < got.entries().size(); ++e)
        CHECK(got.entries()[e] == doctest::Approx(expected.entries()[e]).epsilon(1e-12));
}

TEST_CASE("gaussian S4 satisfies the Stein identity for (a.x)^4") {
    Rng rng(23);
    const int d = 2;
    const Vector a = random_vec(rng, d);
    // E[grad^4 (a.x)^4] = 24 a^{x4}
    const Tensor expected = 24.0 * outer({a, a, a, a});
    const double z = stein_max_z(
        Gaussian{d}, 4, [&](const Vector& x) { return std::pow(a.dot(x), 4); }, expected,
        100000, 911);
    CHECK(z < 3.0);
}

TEST_CASE("gaussian t1/t2 closed forms at the pinned points") {
    const Vector zero = Vector::Zero(2);
    CHECK(gaussian_t2(zero, basis(2, 0)) == doctest::Approx(3.0));
    CHECK(gaussian_t1(zero, basis(2, 0), basis(2, 1)) == doctest::Approx(1.0));
}

TEST_CASE("gaussian t1/t2 equal contractions of the S4 tensor") {
    Rng rng(24);
    const int d = 5;
    for (int trial = 0; trial < 25; ++trial) {
        const Vector x = random_vec(rng, d), u = random_vec(rng, d), v = random_vec(rng, d);
        const Tensor s4 = gaussian_score(4, x);
        CHECK(gaussian_t1(x, u, v) ==
              doctest::Approx(contract(s4, {u, u, v, v})).epsilon(1e-10));
        CHECK(gaussian_t2(x, u) ==
              doctest::Approx(contract(s4, {u, u, u, u})).epsilon(1e-10));
    }
}

TEST_CASE("degenerate mixture reduces to the gaussian score") {
    GaussianMixture mix;
    mix.mu1 = Vector::Zero(2);
    mix.mu2 = Vector::Zero(2);
    mix.weight = 0.3;
    Rng rng(25);
    const Vector x = random_vec(rng, 2);
    for (int m : {1, 2, 4}) {
        const Tensor a = mixture_score(m, x, mix);
        const Tensor b = gaussian_score(m, x);
        for (std::size_t e = 0; e < a.entries().size(); ++e)
            CHECK(a.entries()[e] == doctest::Approx(b.entries()[e]).epsilon(1e-13));
    }
}

TEST_CASE("posterior is one half on the symmetry hyperplane") {
    const GaussianMixture mix = sym_mixture(3);
    Vector x(3);
    x << 0.7, -0.7, 0.0;  // orthogonal to 1_d
    CHECK(mixture_posterior(mix, x) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("posterior stays finite far from both means") {
    const GaussianMixture mix = sym_mixture(2);
    Vector x = Vector::Constant(2, 400.0);
    const double p1 = mixture_posterior(mix, x);
    CHECK(std::isfinite(p1));
    CHECK(p1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mixture S4 matches finite differences of the density") {
    const GaussianMixture mix = sym_mixture(2);
    Rng rng(26);
    for (int trial = 0; trial < 3; ++trial) {
        const Vector x = random_vec(rng, 2);
        const Tensor s4 = mixture_score(4, x, mix);
        const double fx = std::exp(log_density(InputDistribution(mix), x));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) {
                        const double fd =
                            fd_mixture_density_deriv(mix, x, {i, j, k, l}, 0.1) / fx;
                        CHECK(s4.at({i, j, k, l}) == doctest::Approx(fd).epsilon(2e-4));
                    }
    }
}

TEST_CASE("mixture S2 matches finite differences of the density") {
    const GaussianMixture mix = sym_mixture(2, 1.0, 0.35);
    Vector x(2);
    x << 0.3, -1.1;
    const Tensor s2 = mixture_score(2, x, mix);
    const double fx = std::exp(log_density(InputDistribution(mix), x));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double fd = fd_mixture_density_deriv(mix, x, {i, j}, 0.05) / fx;
            CHECK(s2.at({i, j}) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("mixture S4 satisfies the Stein identity for (a.x)^4") {
    Rng rng(27);
    const Vector a = random_vec(rng, 2);
    const Tensor expected = 24.0 * outer({a, a, a, a});
    const double z = stein_max_z(
        sym_mixture(2), 4, [&](const Vector& x) { return std::pow(a.dot(x), 4); },
        expected, 100000, 913);
    CHECK(z < 3.0);
}

TEST_CASE("mixture score is permutation equivariant") {
    GaussianMixture mix;
    mix.mu1 = Vector(3);
    mix.mu1 << 0.5, -1.0, 2.0;
    mix.mu2 = Vector(3);
    mix.mu2 << -0.5, 0.3, -1.7;
    mix.weight = 0.4;
    Rng rng(28);
    const Vector x = random_vec(rng, 3);

    const std::vector<int> perm = {2, 0, 1};  // new index i reads old perm[i]
    GaussianMixture pmix = mix;
    Vector px(3);
    for (int i = 0; i < 3; ++i) {
        px(i) = x(perm[static_cast<std::size_t>(i)]);
        pmix.mu1(i) = mix.mu1(perm[static_cast<std::size_t>(i)]);
        pmix.mu2(i) = mix.mu2(perm[static_cast<std::size_t>(i)]);
    }

    const Tensor t = mixture_score(4, x, mix);
    const Tensor pt = mixture_score(4, px, pmix);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    CHECK(pt.at({i, j, k, l}) ==
                          doctest::Approx(t.at({perm[static_cast<std::size_t>(i)],
                                                perm[static_cast<std::size_t>(j)],
                                                perm[static_cast<std::size_t>(k)],
                                                perm[static_cast<std::size_t>(l)]}))
                              .epsilon(1e-11));
}

TEST_CASE("laplace S4 is the outer power of the sign vector") {
    Vector x(2);
    x << 1.0, -2.0;
    const Tensor t = laplace_score4(x);
    CHECK(t.at({0, 0, 0, 1}) == doctest::Approx(-1.0));
    CHECK(t.at({0, 0, 0, 0}) == doctest::Approx(1.0));
    CHECK(t.at({1, 1, 1, 1}) == doctest::Approx(1.0));

    // all-positive input: all-ones tensor
    Vector xp(2);
    xp << 0.3, 5.0;
    const Tensor tp = laplace_score4(xp);
    for (double e : tp.entries()) CHECK(e == doctest::Approx(1.0));

    // a zero coordinate wipes every entry touching it
    Vector xz(2);
    xz << 0.0, 1.0;
    const Tensor tz = laplace_score4(xz);
    CHECK(tz.at({0, 1, 1, 1}) == 0.0);
    CHECK(tz.at({1, 1, 1, 1}) == 1.0);
}

TEST_CASE("analytic score dispatch covers the three distributions") {
    Rng rng(29);
    const Vector x = random_vec(rng, 2);
    CHECK(analytic_score(Gaussian{2}, 2, x).order() == 2);
    CHECK(analytic_score(sym_mixture(2), 4, x).order() == 4);
    CHECK(analytic_score(SymmetricExponential{2}, 4, x).order() == 4);
    CHECK_THROWS_AS(analytic_score(SymmetricExponential{2}, 2, x), ConfigError);
}

}  // TEST_SUITE
