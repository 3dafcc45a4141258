#pragma once

#include <optional>
#include <vector>

#include "scoreland/common.hpp"
#include "scoreland/tensor.hpp"

namespace scoreland {

// Second-degree local-likelihood score-function estimator. A Gaussian
// kernel and degree 2 give the local moments M0, M1, M2 a closed-form
// solution for the log-density gradient (a1) and Hessian (A2); the score
// tensors are then assembled from the truncated partition expansion with
// the third- and fourth-order log-derivatives set to zero.
struct EstimatorConfig {
    double bandwidth = 0.0;               // h > 0, must be set by the caller
    int degree = 2;                       // fixed at 2 in this artifact
    double min_effective_mass = 1e-8;     // threshold on M0, scaled by n
    double max_condition = 1e12;          // guard on the local covariance
};

struct MomentTriple {
    double m0 = 0.0;
    Vector m1;
    Matrix m2;
};

struct LocalFit {
    Vector a1_hat;   // estimate of grad log f at the query point
    Matrix a2_hat;   // estimate of grad^2 log f, symmetric
    double h = 0.0;  // bandwidth used
};

// One term of the score-function partition expansion
//   S_m = sum_{partitions p of m} (-1)^m c(p) sym( (x)_{j in p} G_j ),
// where G_j is the j-th log-density derivative. The degree-2 estimator
// realizes the terms whose parts are all <= 2 and truncates the rest.
struct PartitionTerm {
    std::vector<int> parts;
    double coefficient = 1.0;
};

// Expansion tables for m in {2, 4}:
//   m=2: {1,1} and {2}, coefficients (1, 1)
//   m=4: {1,1,1,1}, {2,1,1}, {2,2}, {3,1}, {4}, coefficients (1, 6, 3, 4, 1)
std::vector<PartitionTerm> partition_expansion(int m);

// Rate-optimal bandwidth rule h = n^{-1/(2p+2+d)}.
double default_bandwidth(int n, int d, int degree = 2);

// Kernel-weighted moments M_j = sum_i (X_i - x)^{(x)j} exp(-||X_i-x||^2 / 2h^2),
// j in {0,1,2}. Rows of `samples` are the observations.
MomentTriple local_moments(const Matrix& samples, const Vector& x,
                           const EstimatorConfig& cfg);

// Closed-form degree-2 fit:
//   a1 = Sigma^{-1} (M1/M0),  A2 = h^{-2} I - Sigma^{-1},
//   Sigma = M2/M0 - (M1/M0)(M1/M0)^T.
// Throws InsufficientMass when the neighborhood is empty and
// SingularLocalCovariance when Sigma is numerically singular.
LocalFit local_fit(const Matrix& samples, const Vector& x, const EstimatorConfig& cfg);

// Assembles the order-m score estimate from a fit:
//   m=1: -a1;  m=2: a1 a1^T + A2;
//   m=4: a1^{x4} + 6 sym(A2 x a1 x a1) + 3 sym(A2 x A2).
Tensor score_from_fit(const LocalFit& fit, int m);

Tensor estimate_score(const Matrix& samples, const Vector& x,
                      const EstimatorConfig& cfg, int m);

// Local fits at many query points. Queries are independent; the parallel
// path fans them out over the OpenMP pool and produces results identical
// to the serial path. Failed fits are recorded as nullopt.
struct BatchFits {
    std::vector<std::optional<LocalFit>> fits;
    int failures = 0;
};

BatchFits batch_local_fits(const Matrix& samples, const Matrix& queries,
                           const EstimatorConfig& cfg, bool parallel = true);

}  // namespace scoreland
