#pragma once

#include <cstdint>
#include <iosfwd>

#include "scoreland/common.hpp"
#include "scoreland/distributions.hpp"

namespace scoreland {

enum class Activation { ReLU, Softplus, Quartic };

double activate(Activation g, double t);
double activate_grad(Activation g, double t);
// Fourth derivative; defined for the smooth activations only.
double activate_fourth(Activation g, double t);
bool is_smooth(Activation g);

const char* activation_name(Activation g);
Activation activation_from_name(const std::string& name);

// Ground-truth one-hidden-layer network y = sum_i w_i g(<a_i, x>) + eta.
struct TeacherNet {
    Vector w_star;       // length k
    Matrix a_star;       // k x d, row i = a_i
    Activation activation = Activation::ReLU;
    double noise_std = 0.0;
};

struct Dataset {
    Matrix X;            // n x d
    Vector y;            // length n
    std::uint64_t seed = 0;
};

// kappa_i = w_i E[g''''(<a_i, x>)] with Monte Carlo standard errors.
struct TeacherStats {
    Vector kappa;
    Vector kappa_se;
};

// Labels for given inputs; noise is N(0, noise_std^2), seeded.
Vector generate(const TeacherNet& teacher, const Matrix& X, std::uint64_t noise_seed);

// Draws inputs and labels under one master seed (inputs and noise use
// derived sub-seeds).
Dataset make_dataset(const TeacherNet& teacher, const InputDistribution& dist,
                     int n, std::uint64_t seed);

// Monte Carlo estimate of kappa; requires a smooth activation. The Quartic
// activation has g'''' = 24, so kappa_i = 24 w_i exactly with zero variance.
TeacherStats estimate_kappa(const TeacherNet& teacher, const InputDistribution& dist,
                            int n_mc, std::uint64_t seed);

// CSV with header x_0,...,x_{d-1},y; one row per sample, full double
// precision (17 significant digits).
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);

}  // namespace scoreland
