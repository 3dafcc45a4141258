#include "scoreland/distributions.hpp"

#include <cmath>

#include "scoreland/rng.hpp"

namespace scoreland {

namespace {

void check_mixture(const GaussianMixture& mix) {
    if (mix.mu1.size() != mix.mu2.size())
        throw DimensionError("mixture means must share dimension");
    if (!(mix.weight > 0.0 && mix.weight < 1.0))
        throw ConfigError("mixture weight must lie strictly in (0,1)");
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

int dim(const InputDistribution& dist) {
    if (const auto* g = std::get_if<Gaussian>(&dist)) return g->dim;
    if (const auto* m = std::get_if<GaussianMixture>(&dist)) return static_cast<int>(m->mu1.size());
    return std::get<SymmetricExponential>(dist).dim;
}

Matrix sample_input(const InputDistribution& dist, int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("sample count must be >= 1");
    const int d = dim(dist);
    Matrix X(n, d);
    Rng rng(seed);
    if (const auto* mix = std::get_if<GaussianMixture>(&dist)) {
        check_mixture(*mix);
        for (int s = 0; s < n; ++s) {
            const bool first = rng.bernoulli(mix->weight);
            const Vector& mu = first ? mix->mu1 : mix->mu2;
            for (int j = 0; j < d; ++j) X(s, j) = mu(j) + rng.normal();
        }
    } else if (std::holds_alternative<Gaussian>(dist)) {
        for (int s = 0; s < n; ++s)
            for (int j = 0; j < d; ++j) X(s, j) = rng.normal();
    } else {
        for (int s = 0; s < n; ++s)
            for (int j = 0; j < d; ++j) {
                const double mag = rng.exponential();
                X(s, j) = rng.bernoulli(0.5) ? mag : -mag;
            }
    }
    return X;
}

namespace {

double gaussian_log_density(const Vector& z) {
    constexpr double log_2pi = 1.8378770664093454836;
    return -0.5 * z.squaredNorm() - 0.5 * static_cast<double>(z.size()) * log_2pi;
}

}  // namespace

double log_density(const InputDistribution& dist, const Vector& x) {
    if (std::holds_alternative<Gaussian>(dist)) {
        return gaussian_log_density(x);
    }
    if (const auto* mix = std::get_if<GaussianMixture>(&dist)) {
        check_mixture(*mix);
        const double l1 = std::log(mix->weight) + gaussian_log_density(x - mix->mu1);
        const double l2 = std::log1p(-mix->weight) + gaussian_log_density(x - mix->mu2);
        const double m = std::max(l1, l2);
        return m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
    }
    double acc = 0.0;
    for (int j = 0; j < x.size(); ++j) acc += -std::abs(x(j)) - std::log(2.0);
    return acc;
}

double mixture_posterior(const GaussianMixture& mix, const Vector& x) {
    check_mixture(mix);
    const double l1 = std::log(mix.weight) + gaussian_log_density(x - mix.mu1);
    const double l2 = std::log1p(-mix.weight) + gaussian_log_density(x - mix.mu2);
    // p1 = exp(l1) / (exp(l1) + exp(l2)), stabilized.
    const double m = std::max(l1, l2);
    const double e1 = std::exp(l1 - m);
    const double e2 = std::exp(l2 - m);
    return e1 / (e1 + e2);
}

double quartic_score_entry(const Vector& a, const Matrix& M, int i, int j, int k, int l) {
    double t = a(i) * a(j) * a(k) * a(l);
    t += M(i, j) * a(k) * a(l) + M(i, k) * a(j) * a(l) + M(i, l) * a(j) * a(k) +
         M(j, k) * a(i) * a(l) + M(j, l) * a(i) * a(k) + M(k, l) * a(i) * a(j);
    t += M(i, j) * M(k, l) + M(i, k) * M(j, l) + M(i, l) * M(j, k);
    return t;
}

Tensor quartic_score_tensor(const Vector& a, const Matrix& M) {
    const int d = static_cast<int>(a.size());
    if (M.rows() != d || M.cols() != d)
        throw DimensionError("quartic score: vector/matrix dimension mismatch");
    Tensor t(4, d);
    auto& out = t.entries();
    std::size_t flat = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) out[flat++] = quartic_score_entry(a, M, i, j, k, l);
    return t;
}

Tensor gaussian_score(int m, const Vector& x) {
    const int d = static_cast<int>(x.size());
    switch (m) {
        case 1:
            return Tensor::from_vector(x);
        case 2:
            return Tensor::from_matrix(x * x.transpose() - Matrix::Identity(d, d));
        case 4:
            return quartic_score_tensor(x, -Matrix::Identity(d, d));
        default:
            throw ConfigError("gaussian_score supports m in {1,2,4}");
    }
}

double gaussian_t1(const Vector& x, const Vector& u, const Vector& v) {
    if (x.size() != u.size() || x.size() != v.size())
        throw DimensionError("gaussian_t1: dimension mismatch");
    const double ux = u.dot(x), vx = v.dot(x), uv = u.dot(v);
    const double u2 = u.squaredNorm(), v2 = v.squaredNorm();
    return ux * ux * vx * vx - u2 * vx * vx - 4.0 * ux * vx * uv - v2 * ux * ux +
           u2 * v2 + 2.0 * uv * uv;
}

double gaussian_t2(const Vector& x, const Vector& u) {
    if (x.size() != u.size()) throw DimensionError("gaussian_t2: dimension mismatch");
    const double ux = u.dot(x), u2 = u.squaredNorm();
    const double ux2 = ux * ux;
    return ux2 * ux2 - 6.0 * u2 * ux2 + 3.0 * u2 * u2;
}

Tensor mixture_score(int m, const Vector& x, const GaussianMixture& mix) {
    check_mixture(mix);
    const double p1 = mixture_posterior(mix, x);
    Tensor t1 = gaussian_score(m, x - mix.mu1);
    const Tensor t2 = gaussian_score(m, x - mix.mu2);
    t1 *= p1;
    return t1 + (1.0 - p1) * t2;
}

Tensor laplace_score4(const Vector& x) {
    Vector s(x.size());
    for (int j = 0; j < x.size(); ++j) s(j) = sign_of(x(j));
    return outer({s, s, s, s});
}

Tensor analytic_score(const InputDistribution& dist, int m, const Vector& x) {
    if (std::holds_alternative<Gaussian>(dist)) return gaussian_score(m, x);
    if (const auto* mix = std::get_if<GaussianMixture>(&dist)) return mixture_score(m, x, *mix);
    if (m != 4)
        throw ConfigError("symmetric exponential: analytic score available for m = 4 only");
    return laplace_score4(x);
}

}  // namespace scoreland
