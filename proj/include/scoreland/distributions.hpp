#pragma once

#include <cstdint>
#include <variant>

#include "scoreland/common.hpp"
#include "scoreland/tensor.hpp"

namespace scoreland {

// Input laws used across the experiments. All have everywhere-positive
// densities with unit/identity scale, so score functions are well defined.
struct Gaussian {
    int dim = 2;
};

struct GaussianMixture {
    Vector mu1;
    Vector mu2;
    double weight = 0.5;  // mass of the mu1 component, strictly in (0,1)
};

// Per-coordinate symmetric exponential (standard Laplace) density
// f(x_i) = (1/2) exp(-|x_i|).
struct SymmetricExponential {
    int dim = 2;
};

using InputDistribution = std::variant<Gaussian, GaussianMixture, SymmetricExponential>;

int dim(const InputDistribution& dist);

// i.i.d. rows from the named distribution; deterministic given seed.
Matrix sample_input(const InputDistribution& dist, int n, std::uint64_t seed);

double log_density(const InputDistribution& dist, const Vector& x);

// Posterior mass of the mu1 component at x, computed through log-density
// differences so large ||x|| cannot underflow it.
double mixture_posterior(const GaussianMixture& mix, const Vector& x);

// ---------------------------------------------------------------------------
// Closed-form score tensors. Sign convention: S_m = (-1)^m grad^m f / f,
// so S_1 = -grad log f and the standard-Gaussian ground truths read
// S_2 = x x^T - I and S_4 = x^{x4} - 6 sym(x x I) + 3 sym(I I).
// ---------------------------------------------------------------------------

// S_4 of any distribution whose log-density is locally modelled as
// quadratic with gradient a and Hessian M at the point of interest:
//   a^{x4} + 6 sym(M x a x a) + 3 sym(M x M),
// written out entrywise over index pairings. Shared by the analytic
// Gaussian score (a = x, M = -I) and the degree-2 estimator.
Tensor quartic_score_tensor(const Vector& a, const Matrix& M);
double quartic_score_entry(const Vector& a, const Matrix& M, int i, int j, int k, int l);

Tensor gaussian_score(int m, const Vector& x);

// Example-1 closed forms; must equal contractions of gaussian_score(4, x).
double gaussian_t1(const Vector& x, const Vector& u, const Vector& v);
double gaussian_t2(const Vector& x, const Vector& u);

Tensor mixture_score(int m, const Vector& x, const GaussianMixture& mix);

// S_4(x) = sgn(x)^{x4}; sign(0) := 0 (measure-zero set).
Tensor laplace_score4(const Vector& x);

// Dispatch over the distribution. SymmetricExponential supports m = 4 only.
Tensor analytic_score(const InputDistribution& dist, int m, const Vector& x);

}  // namespace scoreland
