#include "scoreland/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scoreland/parallel.hpp"

namespace scoreland {

namespace {

constexpr int kChunk = 256;  // fixed shard size -> scheduling-independent sums

void check_alignment(const Matrix& A, const Dataset& data, const ScoreBatch& scores) {
    if (A.cols() != data.X.cols())
        throw DimensionError("student row dimension does not match data");
    if (scores.size() != static_cast<int>(data.X.rows()))
        throw DimensionError("score batch is not aligned with the dataset");
    if (scores.dim() != static_cast<int>(data.X.cols()))
        throw DimensionError("score batch dimension does not match data");
    if (scores.size() == scores.skipped())
        throw Error("score batch has no usable samples");
}

double regularizer(const Matrix& A, double lambda) {
    double acc = 0.0;
    for (int i = 0; i < A.rows(); ++i) {
        const double t = A.row(i).squaredNorm() - 1.0;
        acc += t * t;
    }
    return lambda * acc;
}

// Shared per-call precomputations for MinusIdentity components. Q = -A A^T
// does not depend on the sample, so its trace, Frobenius norm and product
// with A are hoisted out of the sample loop.
struct MinusIdentityCtx {
    Matrix gram;     // A A^T
    Matrix gram_a;   // (A A^T) A = -(Q A)
    double trace = 0.0;
    double frob2 = 0.0;
};

MinusIdentityCtx make_mi_ctx(const Matrix& A, bool with_grad) {
    MinusIdentityCtx mi;
    mi.gram = A * A.transpose();
    mi.trace = mi.gram.trace();
    mi.frob2 = mi.gram.squaredNorm();
    if (with_grad) mi.gram_a = mi.gram * A;
    return mi;
}

struct SampleTerms {
    double pairsum = 0.0;
    double t2sum = 0.0;
};

// Tensor-term value of one component at one sample.
SampleTerms component_terms(const Matrix& A, const ScoreComponent& comp,
                            const MinusIdentityCtx& mi) {
    const int k = static_cast<int>(A.rows());
    const Vector c = A * comp.a;
    const double P = c.squaredNorm();

    double R = 0.0, cQc = 0.0, qf2 = 0.0, t2 = 0.0;
    switch (comp.model) {
        case ScoreModel::Zero: {
            for (int i = 0; i < k; ++i) t2 += std::pow(c(i), 4);
            SampleTerms out;
            out.t2sum = t2;
            out.pairsum = P * P - t2;
            return out;
        }
        case ScoreModel::MinusIdentity: {
            R = -mi.trace;
            cQc = -(A.transpose() * c).squaredNorm();  // c^T Q c with Q = -A A^T
            qf2 = mi.frob2;
            for (int i = 0; i < k; ++i) {
                const double qii = -mi.gram(i, i);
                t2 += std::pow(c(i), 4) + 6.0 * qii * c(i) * c(i) + 3.0 * qii * qii;
            }
            break;
        }
        case ScoreModel::Dense: {
            const Matrix Q = A * comp.M * A.transpose();
            R = Q.trace();
            cQc = c.dot(Q * c);
            qf2 = Q.squaredNorm();
            for (int i = 0; i < k; ++i)
                t2 += std::pow(c(i), 4) + 6.0 * Q(i, i) * c(i) * c(i) + 3.0 * Q(i, i) * Q(i, i);
            break;
        }
    }
    SampleTerms out;
    out.t2sum = t2;
    const double pr = P + R;
    out.pairsum = pr * pr + 4.0 * cQc + 2.0 * qf2 - t2;
    return out;
}

// Value + gradient of the tensor terms of one component at one sample.
// Returns pairsum - mu*t2sum and accumulates its gradient times `scale`.
double component_terms_grad(const Matrix& A, const ScoreComponent& comp,
                            const MinusIdentityCtx& mi, double mu, double scale,
                            Matrix& grad) {
    const int k = static_cast<int>(A.rows());
    const Vector c = A * comp.a;
    const double P = c.squaredNorm();

    if (comp.model == ScoreModel::Zero) {
        double t2 = 0.0;
        for (int i = 0; i < k; ++i) t2 += std::pow(c(i), 4);
        for (int r = 0; r < k; ++r) {
            const double coeff = 4.0 * c(r) * (P - (1.0 + mu) * c(r) * c(r));
            grad.row(r) += scale * coeff * comp.a.transpose();
        }
        return (P * P - t2) - mu * t2;
    }

    if (comp.model == ScoreModel::MinusIdentity) {
        const Vector z = A.transpose() * c;
        const Vector Qc = -(A * z);
        const double cQc = -z.squaredNorm();
        const double R = -mi.trace;
        const double pr = P + R;

        double t2 = 0.0;
        for (int i = 0; i < k; ++i) {
            const double qii = -mi.gram(i, i);
            t2 += std::pow(c(i), 4) + 6.0 * qii * c(i) * c(i) + 3.0 * qii * qii;
        }
        const double value = (pr * pr + 4.0 * cQc + 2.0 * mi.frob2 - t2) - mu * t2;

        for (int r = 0; r < k; ++r) {
            // Y.row(r) = -A.row(r);  M (Q A).row(r) = +(gram A).row(r)
            Vector g = 4.0 * pr * (c(r) * comp.a - A.row(r).transpose());
            g += 8.0 * Qc(r) * comp.a - 8.0 * c(r) * z;
            g += 8.0 * mi.gram_a.row(r).transpose();
            const double qrr = -mi.gram(r, r);
            g -= (1.0 + mu) * ((4.0 * std::pow(c(r), 3) + 12.0 * c(r) * qrr) * comp.a -
                               (12.0 * c(r) * c(r) + 12.0 * qrr) * A.row(r).transpose());
            grad.row(r) += scale * g.transpose();
        }
        return value;
    }

    // Dense M (degree-2 estimator components; d stays small there).
    const Matrix Y = A * comp.M;
    const Matrix Q = Y * A.transpose();
    const Matrix W = Q * A;
    const double R = Q.trace();
    const Vector Qc = Q * c;
    const double cQc = c.dot(Qc);
    const double qf2 = Q.squaredNorm();
    const Vector z = A.transpose() * c;
    const Vector Mz = comp.M * z;

    double t2 = 0.0;
    for (int i = 0; i < k; ++i)
        t2 += std::pow(c(i), 4) + 6.0 * Q(i, i) * c(i) * c(i) + 3.0 * Q(i, i) * Q(i, i);
    const double pr = P + R;
    const double value = (pr * pr + 4.0 * cQc + 2.0 * qf2 - t2) - mu * t2;

    for (int r = 0; r < k; ++r) {
        const Vector y_row = Y.row(r).transpose();
        Vector g = 2.0 * pr * (2.0 * c(r) * comp.a + 2.0 * y_row);
        g += 8.0 * Qc(r) * comp.a + 8.0 * c(r) * Mz;
        g += 8.0 * (comp.M * W.row(r).transpose());
        const double qrr = Q(r, r);
        g -= (1.0 + mu) * ((4.0 * std::pow(c(r), 3) + 12.0 * c(r) * qrr) * comp.a +
                           (12.0 * c(r) * c(r) + 12.0 * qrr) * y_row);
        grad.row(r) += scale * g.transpose();
    }
    return value;
}

}  // namespace

ScoreBatch ScoreBatch::gaussian_assumed(const Matrix& X) {
    ScoreBatch batch;
    batch.dim_ = static_cast<int>(X.cols());
    batch.components_.resize(static_cast<std::size_t>(X.rows()));
    for (int s = 0; s < X.rows(); ++s) {
        ScoreComponent comp;
        comp.weight = 1.0;
        comp.a = X.row(s).transpose();
        comp.model = ScoreModel::MinusIdentity;
        batch.components_[static_cast<std::size_t>(s)].push_back(std::move(comp));
    }
    return batch;
}

ScoreBatch ScoreBatch::analytic(const InputDistribution& dist, const Matrix& X) {
    ScoreBatch batch;
    batch.dim_ = static_cast<int>(X.cols());
    if (batch.dim_ != scoreland::dim(dist))
        throw DimensionError("distribution dimension does not match samples");
    batch.components_.resize(static_cast<std::size_t>(X.rows()));

    if (std::holds_alternative<Gaussian>(dist)) {
        return gaussian_assumed(X);  // matched case coincides with the G forms
    }
    if (const auto* mix = std::get_if<GaussianMixture>(&dist)) {
        for (int s = 0; s < X.rows(); ++s) {
            const Vector x = X.row(s).transpose();
            const double p1 = mixture_posterior(*mix, x);
            ScoreComponent c1{p1, x - mix->mu1, ScoreModel::MinusIdentity, {}};
            ScoreComponent c2{1.0 - p1, x - mix->mu2, ScoreModel::MinusIdentity, {}};
            auto& comps = batch.components_[static_cast<std::size_t>(s)];
            comps.push_back(std::move(c1));
            comps.push_back(std::move(c2));
        }
        return batch;
    }
    for (int s = 0; s < X.rows(); ++s) {
        ScoreComponent comp;
        comp.weight = 1.0;
        comp.a = Vector(X.cols());
        for (int j = 0; j < X.cols(); ++j) {
            const double v = X(s, j);
            comp.a(j) = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        }
        comp.model = ScoreModel::Zero;
        batch.components_[static_cast<std::size_t>(s)].push_back(std::move(comp));
    }
    return batch;
}

ScoreBatch ScoreBatch::llsfe(const Matrix& X, const EstimatorConfig& cfg, bool parallel) {
    ScoreBatch batch;
    batch.dim_ = static_cast<int>(X.cols());
    const BatchFits fits = batch_local_fits(X, X, cfg, parallel);
    batch.components_.resize(static_cast<std::size_t>(X.rows()));
    for (int s = 0; s < X.rows(); ++s) {
        const auto& fit = fits.fits[static_cast<std::size_t>(s)];
        if (!fit) continue;  // skipped sample
        ScoreComponent comp;
        comp.weight = 1.0;
        comp.a = fit->a1_hat;
        comp.model = ScoreModel::Dense;
        comp.M = fit->a2_hat;
        batch.components_[static_cast<std::size_t>(s)].push_back(std::move(comp));
    }
    batch.skipped_ = fits.failures;
    return batch;
}

ScoreBatch ScoreBatch::subset(const std::vector<int>& indices) const {
    ScoreBatch out;
    out.dim_ = dim_;
    out.components_.reserve(indices.size());
    for (int s : indices) {
        if (s < 0 || s >= size()) throw DimensionError("subset index out of range");
        out.components_.push_back(components_[static_cast<std::size_t>(s)]);
        if (out.components_.back().empty()) ++out.skipped_;
    }
    return out;
}

Tensor ScoreBatch::dense_tensor(int s) const {
    const auto& comps = components_[static_cast<std::size_t>(s)];
    if (comps.empty()) throw Error("dense_tensor of a skipped sample");
    Tensor acc(4, dim_);
    const Matrix minus_id = -Matrix::Identity(dim_, dim_);
    const Matrix zero = Matrix::Zero(dim_, dim_);
    for (const auto& comp : comps) {
        const Matrix& M = comp.model == ScoreModel::Dense
                              ? comp.M
                              : (comp.model == ScoreModel::MinusIdentity ? minus_id : zero);
        acc += comp.weight * quartic_score_tensor(comp.a, M);
    }
    return acc;
}

double landscape_loss(const Matrix& A, const Dataset& data, const ScoreBatch& scores,
                      const LossConfig& cfg, bool parallel) {
    check_alignment(A, data, scores);
    const int n = scores.size();
    const int n_used = n - scores.skipped();

    const MinusIdentityCtx mi = make_mi_ctx(A, /*with_grad=*/false);

    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
    par::for_each_index(n_chunks, parallel, [&](std::int64_t chunk) {
        const int lo = static_cast<int>(chunk) * kChunk;
        const int hi = std::min(lo + kChunk, n);
        double acc = 0.0;
        for (int s = lo; s < hi; ++s) {
            if (scores.is_skipped(s)) continue;
            double sample = 0.0;
            for (const auto& comp : scores.components(s)) {
                const SampleTerms t = component_terms(A, comp, mi);
                sample += comp.weight * (t.pairsum - cfg.mu * t.t2sum);
            }
            acc += data.y(s) * sample;
        }
        partial[static_cast<std::size_t>(chunk)] = acc;
    });

    double total = 0.0;
    for (double p : partial) total += p;  // fixed chunk order
    return cfg.sign * total / static_cast<double>(n_used) + regularizer(A, cfg.lambda);
}

LossGrad landscape_loss_grad(const Matrix& A, const Dataset& data,
                             const ScoreBatch& scores, const LossConfig& cfg,
                             bool parallel) {
    check_alignment(A, data, scores);
    const int n = scores.size();
    const int n_used = n - scores.skipped();
    const int k = static_cast<int>(A.rows());
    const int d = static_cast<int>(A.cols());

    const MinusIdentityCtx mi = make_mi_ctx(A, /*with_grad=*/true);

    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial_val(static_cast<std::size_t>(n_chunks), 0.0);
    std::vector<Matrix> partial_grad(static_cast<std::size_t>(n_chunks));
    par::for_each_index(n_chunks, parallel, [&](std::int64_t chunk) {
        const int lo = static_cast<int>(chunk) * kChunk;
        const int hi = std::min(lo + kChunk, n);
        double acc = 0.0;
        Matrix g = Matrix::Zero(k, d);
        for (int s = lo; s < hi; ++s) {
            if (scores.is_skipped(s)) continue;
            const double ys = data.y(s);
            for (const auto& comp : scores.components(s)) {
                acc += ys * comp.weight *
                       component_terms_grad(A, comp, mi, cfg.mu, ys * comp.weight, g);
            }
        }
        partial_val[static_cast<std::size_t>(chunk)] = acc;
        partial_grad[static_cast<std::size_t>(chunk)] = std::move(g);
    });

    double total = 0.0;
    Matrix grad = Matrix::Zero(k, d);
    for (int c = 0; c < n_chunks; ++c) {
        total += partial_val[static_cast<std::size_t>(c)];
        grad += partial_grad[static_cast<std::size_t>(c)];
    }

    LossGrad out;
    const double scale = cfg.sign / static_cast<double>(n_used);
    out.value = scale * total + regularizer(A, cfg.lambda);
    out.grad = scale * grad;
    for (int r = 0; r < k; ++r) {
        const double t = A.row(r).squaredNorm() - 1.0;
        out.grad.row(r) += 4.0 * cfg.lambda * t * A.row(r);
    }
    return out;
}

std::vector<double> landscape_loss_contributions(const Matrix& A, const Dataset& data,
                                                 const ScoreBatch& scores,
                                                 const LossConfig& cfg) {
    check_alignment(A, data, scores);
    const MinusIdentityCtx mi = make_mi_ctx(A, /*with_grad=*/false);

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(scores.size() - scores.skipped()));
    for (int s = 0; s < scores.size(); ++s) {
        if (scores.is_skipped(s)) continue;
        double sample = 0.0;
        for (const auto& comp : scores.components(s)) {
            const SampleTerms t = component_terms(A, comp, mi);
            sample += comp.weight * (t.pairsum - cfg.mu * t.t2sum);
        }
        out.push_back(cfg.sign * data.y(s) * sample);
    }
    return out;
}

double landscape_loss_reference(const Matrix& A, const Dataset& data,
                                const ScoreBatch& scores, const LossConfig& cfg) {
    check_alignment(A, data, scores);
    const int n = scores.size();
    const int n_used = n - scores.skipped();
    const int k = static_cast<int>(A.rows());

    std::vector<Vector> rows(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) rows[static_cast<std::size_t>(i)] = A.row(i).transpose();

    double total = 0.0;
    for (int s = 0; s < n; ++s) {
        if (scores.is_skipped(s)) continue;
        const Tensor t = scores.dense_tensor(s);
        double pairs = 0.0, t2 = 0.0;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (i == j) continue;
                pairs += contract(t, {rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(i)],
                                      rows[static_cast<std::size_t>(j)], rows[static_cast<std::size_t>(j)]});
            }
            t2 += contract(t, {rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(i)],
                               rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(i)]});
        }
        total += data.y(s) * (pairs - cfg.mu * t2);
    }
    return cfg.sign * total / static_cast<double>(n_used) + regularizer(A, cfg.lambda);
}

double tensor_form_loss(const Matrix& A, const TeacherNet& teacher,
                        const TeacherStats& stats, const LossConfig& cfg) {
    if (!is_smooth(teacher.activation))
        throw NonSmoothActivation("tensor_form_loss requires a smooth activation");
    if (teacher.a_star.cols() != A.cols())
        throw DimensionError("tensor_form_loss: dimension mismatch");

    const Matrix P = teacher.a_star * A.transpose();  // <a_i*, a_j>
    double term1 = 0.0, term2 = 0.0;
    for (int i = 0; i < P.rows(); ++i) {
        double sum2 = 0.0, sum4 = 0.0;
        for (int j = 0; j < P.cols(); ++j) {
            const double p2 = P(i, j) * P(i, j);
            sum2 += p2;
            sum4 += p2 * p2;
        }
        term1 += stats.kappa(i) * (sum2 * sum2 - sum4);
        term2 += stats.kappa(i) * sum4;
    }
    return cfg.sign * (term1 - cfg.mu * term2) + regularizer(A, cfg.lambda);
}

double l2_loss(const Matrix& A, const Vector& w, const Dataset& data, Activation g) {
    if (A.rows() != w.size()) throw DimensionError("l2_loss: weight/row mismatch");
    if (A.cols() != data.X.cols()) throw DimensionError("l2_loss: dimension mismatch");
    const Matrix Z = data.X * A.transpose();
    double acc = 0.0;
    for (int s = 0; s < Z.rows(); ++s) {
        double pred = 0.0;
        for (int i = 0; i < w.size(); ++i) pred += w(i) * activate(g, Z(s, i));
        const double r = pred - data.y(s);
        acc += r * r;
    }
    return acc / static_cast<double>(Z.rows());
}

Matrix l2_loss_grad(const Matrix& A, const Vector& w, const Dataset& data, Activation g) {
    if (A.rows() != w.size()) throw DimensionError("l2_loss_grad: weight/row mismatch");
    const int n = static_cast<int>(data.X.rows());
    const int k = static_cast<int>(A.rows());
    const Matrix Z = data.X * A.transpose();

    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<Matrix> partial(static_cast<std::size_t>(n_chunks));
    par::for_each_index(n_chunks, true, [&](std::int64_t chunk) {
        const int lo = static_cast<int>(chunk) * kChunk;
        const int hi = std::min(lo + kChunk, n);
        Matrix gm = Matrix::Zero(k, A.cols());
        for (int s = lo; s < hi; ++s) {
            double pred = 0.0;
            for (int i = 0; i < k; ++i) pred += w(i) * activate(g, Z(s, i));
            const double r = 2.0 * (pred - data.y(s));
            for (int i = 0; i < k; ++i) {
                const double slope = w(i) * activate_grad(g, Z(s, i));
                if (slope != 0.0) gm.row(i) += r * slope * data.X.row(s);
            }
        }
        partial[static_cast<std::size_t>(chunk)] = std::move(gm);
    });
    Matrix grad = Matrix::Zero(k, A.cols());
    for (const Matrix& p : partial) grad += p;
    return grad / static_cast<double>(n);
}

double param_error(const Matrix& A, const Matrix& A_star) {
    if (A_star.rows() != A_star.cols())
        throw DimensionError("param_error requires a square A* (k = d)");
    if (A.rows() != A_star.rows() || A.cols() != A_star.cols())
        throw DimensionError("param_error: A and A* must have matching shape");

    Eigen::FullPivLU<Matrix> lu(A_star);
    if (!lu.isInvertible()) throw Error("param_error: A* is singular");
    // M = A A*^{-1}: rows of A expressed in the teacher's row basis, so a
    // signed row permutation of A* maps to a signed permutation matrix for
    // any invertible A* (and M = A when A* = I).
    const Matrix M = A * lu.inverse();

    const int d = static_cast<int>(M.rows());
    double row_min = std::numeric_limits<double>::infinity();
    double col_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        double row_max = 0.0, col_max = 0.0;
        for (int j = 0; j < d; ++j) {
            row_max = std::max(row_max, std::abs(M(i, j)));
            col_max = std::max(col_max, std::abs(M(j, i)));
        }
        row_min = std::min(row_min, row_max);
        col_min = std::min(col_min, col_max);
    }
    return std::min(1.0 - row_min, 1.0 - col_min);
}

Dataset dataset_subset(const Dataset& data, const std::vector<int>& indices) {
    Dataset out;
    out.seed = data.seed;
    out.X = Matrix(static_cast<int>(indices.size()), data.X.cols());
    out.y = Vector(static_cast<int>(indices.size()));
    for (int r = 0; r < static_cast<int>(indices.size()); ++r) {
        const int s = indices[static_cast<std::size_t>(r)];
        if (s < 0 || s >= data.X.rows()) throw DimensionError("subset index out of range");
        out.X.row(r) = data.X.row(s);
        out.y(r) = data.y(s);
    }
    return out;
}

Vector recover_w(const Matrix& A, const Dataset& data, Activation g) {
    const int n = static_cast<int>(data.X.rows());
    const int k = static_cast<int>(A.rows());
    const Matrix Z = data.X * A.transpose();
    Matrix design(n, k);
    for (int s = 0; s < n; ++s)
        for (int i = 0; i < k; ++i) design(s, i) = activate(g, Z(s, i));

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < k)
        throw RankDeficientDesign("activation design matrix is rank deficient");
    return qr.solve(data.y);
}

}  // namespace scoreland
