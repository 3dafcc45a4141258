#pragma once

#include <vector>

#include "scoreland/common.hpp"

namespace scoreland {

// Dense symmetric-tensor arithmetic for orders 1-4. Entries are stored
// row-major over multi-indices (i1,...,im), each index in [0, dim).
// Storage is dense on purpose: the experiments run at d <= ~64 for order 2
// and d <= ~16 for order 4, where packed symmetric formats buy nothing.
class Tensor {
public:
    Tensor(int order, int dim);

    static Tensor from_vector(const Vector& v);
    static Tensor from_matrix(const Matrix& m);

    int order() const { return order_; }
    int dim() const { return dim_; }

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;

    std::vector<double>& entries() { return entries_; }
    const std::vector<double>& entries() const { return entries_; }

    Vector to_vector() const;   // order 1 only
    Matrix to_matrix() const;   // order 2 only

    Tensor& operator+=(const Tensor& rhs);
    Tensor& operator-=(const Tensor& rhs);
    Tensor& operator*=(double s);

    friend Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
    friend Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
    friend Tensor operator*(Tensor t, double s) { return t *= s; }
    friend Tensor operator*(double s, Tensor t) { return t *= s; }

private:
    int order_;
    int dim_;
    std::vector<double> entries_;
};

// Outer product of the given vectors; order equals the list length.
Tensor outer(const std::vector<Vector>& vectors);

// Average over all order! index permutations. Exact enumeration (m <= 4
// means at most 24 permutations), no sampling.
Tensor sym(const Tensor& t);

// Full contraction T(v1, ..., vm); list length must equal the order.
double contract(const Tensor& t, const std::vector<Vector>& vectors);

double frobenius_norm(const Tensor& t);

// Largest singular value of an order-2 tensor, via symmetric power
// iteration on t^T t to relative tolerance 1e-9.
double spectral_norm_matrix(const Tensor& t);
double spectral_norm_matrix(const Matrix& m);

}  // namespace scoreland
