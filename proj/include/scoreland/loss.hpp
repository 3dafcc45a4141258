#pragma once

#include <cstdint>
#include <vector>

#include "scoreland/common.hpp"
#include "scoreland/distributions.hpp"
#include "scoreland/llsfe.hpp"
#include "scoreland/teacher.hpp"
#include "scoreland/tensor.hpp"

namespace scoreland {

// ---------------------------------------------------------------------------
// Per-sample fourth-order score representation.
//
// Every provider in the experiments yields S_4(x) as a short weighted sum of
// "local quadratic log-density" components (a, M):
//     S_4(x) = sum_c w_c [ a_c^{x4} + 6 sym(M_c x a_c x a_c) + 3 sym(M_c x M_c) ]
// with M = -I for Gaussian-type components (analytic Gaussian and each
// mixture posterior component), M = 0 for the Laplace sign score, and a dense
// symmetric M for the degree-2 estimator. The loss kernel exploits this
// structure so t1/t2 contractions never materialize the d^4 tensor; the
// dense-tensor route is kept as a reference implementation for testing.
// ---------------------------------------------------------------------------

enum class ScoreModel { Zero, MinusIdentity, Dense };

struct ScoreComponent {
    double weight = 1.0;
    Vector a;
    ScoreModel model = ScoreModel::MinusIdentity;
    Matrix M;  // populated only for Dense
};

class ScoreBatch {
public:
    // Gaussian closed forms applied verbatim to the given samples, whatever
    // their true law (the G baseline).
    static ScoreBatch gaussian_assumed(const Matrix& X);

    // Matched analytic scores for the named distribution.
    static ScoreBatch analytic(const InputDistribution& dist, const Matrix& X);

    // Degree-2 LLSFE fits at every sample point. Failed fits mark the sample
    // as skipped; skipped samples are excluded from empirical means.
    static ScoreBatch llsfe(const Matrix& X, const EstimatorConfig& cfg,
                            bool parallel = true);

    int size() const { return static_cast<int>(components_.size()); }
    int dim() const { return dim_; }
    int skipped() const { return skipped_; }
    bool is_skipped(int s) const { return components_[static_cast<std::size_t>(s)].empty(); }
    const std::vector<ScoreComponent>& components(int s) const {
        return components_[static_cast<std::size_t>(s)];
    }

    // Materializes S_4(X_s) as a dense symmetric tensor.
    Tensor dense_tensor(int s) const;

    // Scores for the listed samples (duplicates allowed), for mini-batches.
    ScoreBatch subset(const std::vector<int>& indices) const;

private:
    int dim_ = 0;
    int skipped_ = 0;
    std::vector<std::vector<ScoreComponent>> components_;
};

// ---------------------------------------------------------------------------
// The designed loss
//   L(A) = s * [ sum_{i != j} E^[y t1(x,a_i,a_j)] - mu sum_i E^[y t2(x,a_i)] ]
//          + lambda sum_i (||a_i||^2 - 1)^2
// over empirical means, with an optional global sign s in {+1,-1} applied to
// the two tensor terms (chosen so that the effective Stein weights kappa_i
// are treated as positive; see LossConfig::sign).
// ---------------------------------------------------------------------------

struct LossConfig {
    double mu = 1.0;
    double lambda = 1.0;
    double sign = 1.0;  // flip to -1 when kappa* < 0 (e.g. ReLU teachers)
};

struct LossGrad {
    double value = 0.0;
    Matrix grad;
};

double landscape_loss(const Matrix& A, const Dataset& data, const ScoreBatch& scores,
                      const LossConfig& cfg, bool parallel = true);

LossGrad landscape_loss_grad(const Matrix& A, const Dataset& data,
                             const ScoreBatch& scores, const LossConfig& cfg,
                             bool parallel = true);

// Per-sample tensor-term contributions sign*y_s*(pairsum_s - mu*t2sum_s) for
// the non-skipped samples, in sample order. Their mean plus the regularizer
// equals landscape_loss; used for bootstrap error bars.
std::vector<double> landscape_loss_contributions(const Matrix& A, const Dataset& data,
                                                 const ScoreBatch& scores,
                                                 const LossConfig& cfg);

// Reference route: contracts dense per-sample tensors entry by entry.
// Serial; kept for testing and benchmarking against the structured kernel.
double landscape_loss_reference(const Matrix& A, const Dataset& data,
                                const ScoreBatch& scores, const LossConfig& cfg);

// Population characterization for k = d teachers with smooth activations:
//   sum_i kappa_i sum_{j != l} <a_i*,a_j>^2 <a_i*,a_l>^2
//   - mu sum_{i,j} kappa_i <a_i*,a_j>^4 + lambda sum_j (||a_j||^2 - 1)^2.
// The sign flag is applied to the two kappa terms exactly as in the
// empirical loss.
double tensor_form_loss(const Matrix& A, const TeacherNet& teacher,
                        const TeacherStats& stats, const LossConfig& cfg);

// Plain empirical squared-error loss of the student network.
double l2_loss(const Matrix& A, const Vector& w, const Dataset& data, Activation g);
Matrix l2_loss_grad(const Matrix& A, const Vector& w, const Dataset& data, Activation g);

// min{1 - min_i max_j |(A*^{-1}A)_{ij}|, 1 - min_j max_i |(A*^{-1}A)_{ij}|};
// zero exactly on signed permutations of A*.
double param_error(const Matrix& A, const Matrix& A_star);

// Least-squares second-layer weights for fixed A.
Vector recover_w(const Matrix& A, const Dataset& data, Activation g);

// Rows/labels for the listed samples (duplicates allowed).
Dataset dataset_subset(const Dataset& data, const std::vector<int>& indices);

}  // namespace scoreland
