#include "scoreland/llsfe.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "scoreland/distributions.hpp"
#include "scoreland/parallel.hpp"

namespace scoreland {

std::vector<PartitionTerm> partition_expansion(int m) {
    switch (m) {
        case 2:
            return {{{1, 1}, 1.0}, {{2}, 1.0}};
        case 4:
            return {{{1, 1, 1, 1}, 1.0},
                    {{2, 1, 1}, 6.0},
                    {{2, 2}, 3.0},
                    {{3, 1}, 4.0},
                    {{4}, 1.0}};
        default:
            throw ConfigError("partition expansion tabulated for m in {2,4}");
    }
}

double default_bandwidth(int n, int d, int degree) {
    if (n < 1) throw ConfigError("default_bandwidth requires n >= 1");
    return std::pow(static_cast<double>(n), -1.0 / static_cast<double>(2 * degree + 2 + d));
}

MomentTriple local_moments(const Matrix& samples, const Vector& x,
                           const EstimatorConfig& cfg) {
    if (samples.rows() < 1) throw ConfigError("local_moments requires n >= 1");
    if (samples.cols() != x.size())
        throw DimensionError("query point dimension does not match samples");
    if (!(cfg.bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");

    const int n = static_cast<int>(samples.rows());
    const int d = static_cast<int>(samples.cols());
    const double inv_2h2 = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);

    MomentTriple m;
    m.m1 = Vector::Zero(d);
    m.m2 = Matrix::Zero(d, d);
    Vector diff(d);
    for (int i = 0; i < n; ++i) {
        diff = samples.row(i).transpose() - x;
        const double w = std::exp(-diff.squaredNorm() * inv_2h2);
        m.m0 += w;
        m.m1.noalias() += w * diff;
        m.m2.noalias() += w * diff * diff.transpose();
    }
    return m;
}

LocalFit local_fit(const Matrix& samples, const Vector& x, const EstimatorConfig& cfg) {
    const MomentTriple m = local_moments(samples, x, cfg);
    const int n = static_cast<int>(samples.rows());
    const int d = static_cast<int>(samples.cols());

    if (m.m0 < cfg.min_effective_mass * static_cast<double>(n))
        throw InsufficientMass("no samples carry kernel mass near the query point");

    const Vector b = m.m1 / m.m0;
    Matrix sigma = m.m2 / m.m0 - b * b.transpose();
    sigma = 0.5 * (sigma + sigma.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    if (eig.info() != Eigen::Success)
        throw SingularLocalCovariance("local covariance eigendecomposition failed");
    const Vector& ev = eig.eigenvalues();
    const double ev_min = ev(0);
    const double ev_max = ev(d - 1);
    if (!(ev_min > 0.0) || ev_max / ev_min > cfg.max_condition)
        throw SingularLocalCovariance(
            "local covariance numerically singular (bandwidth too small or degenerate query)");

    const Matrix sigma_inv =
        eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

    LocalFit fit;
    fit.h = cfg.bandwidth;
    fit.a1_hat = sigma_inv * b;
    fit.a2_hat = Matrix::Identity(d, d) / (cfg.bandwidth * cfg.bandwidth) - sigma_inv;
    fit.a2_hat = 0.5 * (fit.a2_hat + fit.a2_hat.transpose());
    return fit;
}

Tensor score_from_fit(const LocalFit& fit, int m) {
    switch (m) {
        case 1:
            return Tensor::from_vector(-fit.a1_hat);
        case 2:
            return Tensor::from_matrix(fit.a1_hat * fit.a1_hat.transpose() + fit.a2_hat);
        case 4:
            return quartic_score_tensor(fit.a1_hat, fit.a2_hat);
        default:
            throw ConfigError("estimate_score supports m in {1,2,4}");
    }
}

Tensor estimate_score(const Matrix& samples, const Vector& x,
                      const EstimatorConfig& cfg, int m) {
    return score_from_fit(local_fit(samples, x, cfg), m);
}

BatchFits batch_local_fits(const Matrix& samples, const Matrix& queries,
                           const EstimatorConfig& cfg, bool parallel) {
    const auto nq = static_cast<std::int64_t>(queries.rows());
    BatchFits out;
    out.fits.assign(static_cast<std::size_t>(nq), std::nullopt);
    par::for_each_index(nq, parallel, [&](std::int64_t q) {
        try {
            out.fits[static_cast<std::size_t>(q)] =
                local_fit(samples, queries.row(q).transpose(), cfg);
        } catch (const Error&) {
            // left as nullopt; counted below
        }
    });
    for (const auto& f : out.fits)
        if (!f) ++out.failures;
    return out;
}

}  // namespace scoreland
