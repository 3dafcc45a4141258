#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scoreland {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Raised when a local neighborhood holds too little kernel mass for a fit.
struct InsufficientMass : Error {
    using Error::Error;
};

// Raised when the local covariance is numerically singular (query point
// degenerate or bandwidth too small).
struct SingularLocalCovariance : Error {
    using Error::Error;
};

struct NonSmoothActivation : Error {
    using Error::Error;
};

struct RankDeficientDesign : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Divergence detected during training; carries the offending iteration.
struct NonFiniteLoss : Error {
    NonFiniteLoss(const std::string& what, int iter)
        : Error(what), iteration(iter) {}
    int iteration;
};

}  // namespace scoreland
