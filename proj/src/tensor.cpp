#include "scoreland/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scoreland {

namespace {

std::size_t pow_dim(int dim, int order) {
    std::size_t p = 1;
    for (int i = 0; i < order; ++i) p *= static_cast<std::size_t>(dim);
    return p;
}

}  // namespace

Tensor::Tensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 1) throw DimensionError("tensor order must be >= 1");
    if (dim < 1) throw DimensionError("tensor dim must be >= 1");
    entries_.assign(pow_dim(dim, order), 0.0);
}

Tensor Tensor::from_vector(const Vector& v) {
    Tensor t(1, static_cast<int>(v.size()));
    for (int i = 0; i < v.size(); ++i) t.entries_[static_cast<std::size_t>(i)] = v(i);
    return t;
}

Tensor Tensor::from_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("order-2 tensor requires a square matrix");
    const int d = static_cast<int>(m.rows());
    Tensor t(2, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            t.entries_[static_cast<std::size_t>(i) * d + j] = m(i, j);
    return t;
}

namespace {

std::size_t flat_index(const std::vector<int>& idx, int order, int dim) {
    if (static_cast<int>(idx.size()) != order)
        throw DimensionError("index arity does not match tensor order");
    std::size_t flat = 0;
    for (int i : idx) {
        if (i < 0 || i >= dim) throw DimensionError("tensor index out of range");
        flat = flat * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
    }
    return flat;
}

}  // namespace

double& Tensor::at(const std::vector<int>& idx) {
    return entries_[flat_index(idx, order_, dim_)];
}

double Tensor::at(const std::vector<int>& idx) const {
    return entries_[flat_index(idx, order_, dim_)];
}

Vector Tensor::to_vector() const {
    if (order_ != 1) throw DimensionError("to_vector requires order 1");
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = entries_[static_cast<std::size_t>(i)];
    return v;
}

Matrix Tensor::to_matrix() const {
    if (order_ != 2) throw DimensionError("to_matrix requires order 2");
    Matrix m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            m(i, j) = entries_[static_cast<std::size_t>(i) * dim_ + j];
    return m;
}

Tensor& Tensor::operator+=(const Tensor& rhs) {
    if (order_ != rhs.order_ || dim_ != rhs.dim_)
        throw DimensionError("tensor shape mismatch in addition");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& rhs) {
    if (order_ != rhs.order_ || dim_ != rhs.dim_)
        throw DimensionError("tensor shape mismatch in subtraction");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= rhs.entries_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& e : entries_) e *= s;
    return *this;
}

Tensor outer(const std::vector<Vector>& vectors) {
    if (vectors.empty()) throw DimensionError("outer product of an empty list");
    const int d = static_cast<int>(vectors.front().size());
    for (const Vector& v : vectors)
        if (v.size() != d) throw DimensionError("outer product vectors must share dimension");
    const int m = static_cast<int>(vectors.size());
    Tensor t(m, d);
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    auto& out = t.entries();
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        double prod = 1.0;
        for (int j = 0; j < m; ++j) prod *= vectors[static_cast<std::size_t>(j)](idx[static_cast<std::size_t>(j)]);
        out[flat] = prod;
        for (int j = m - 1; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < d) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
    }
    return t;
}

Tensor sym(const Tensor& t) {
    const int m = t.order();
    const int d = t.dim();
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    Tensor out(m, d);
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    std::vector<int> pidx(static_cast<std::size_t>(m), 0);
    const auto& in = t.entries();
    auto& o = out.entries();
    for (std::size_t flat = 0; flat < o.size(); ++flat) {
        double acc = 0.0;
        for (const auto& p : perms) {
            for (int j = 0; j < m; ++j) pidx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])];
            std::size_t pf = 0;
            for (int j = 0; j < m; ++j) pf = pf * static_cast<std::size_t>(d) + static_cast<std::size_t>(pidx[static_cast<std::size_t>(j)]);
            acc += in[pf];
        }
        o[flat] = acc / static_cast<double>(perms.size());
        for (int j = m - 1; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < d) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
    }
    return out;
}

double contract(const Tensor& t, const std::vector<Vector>& vectors) {
    const int m = t.order();
    const int d = t.dim();
    if (static_cast<int>(vectors.size()) != m)
        throw DimensionError("contraction arity does not match tensor order");
    for (const Vector& v : vectors)
        if (v.size() != d) throw DimensionError("contraction vector dimension mismatch");

    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    const auto& in = t.entries();
    double acc = 0.0;
    for (std::size_t flat = 0; flat < in.size(); ++flat) {
        double prod = in[flat];
        for (int j = 0; j < m; ++j) prod *= vectors[static_cast<std::size_t>(j)](idx[static_cast<std::size_t>(j)]);
        acc += prod;
        for (int j = m - 1; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < d) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
    }
    return acc;
}

double frobenius_norm(const Tensor& t) {
    double acc = 0.0;
    for (double e : t.entries()) acc += e * e;
    return std::sqrt(acc);
}

double spectral_norm_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("spectral norm requires a square matrix");
    const int d = static_cast<int>(m.rows());
    const Matrix mtm = m.transpose() * m;
    if (mtm.norm() == 0.0) return 0.0;

    // Power iteration on the symmetric PSD matrix m^T m.
    Vector v = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = mtm * v;
        const double norm = w.norm();
        if (norm == 0.0) {
            // Landed in the kernel; restart from a skewed direction.
            v = Vector::Zero(d);
            v(it % d) = 1.0;
            continue;
        }
        v = w / norm;
        const double next = v.dot(mtm * v);
        if (std::abs(next - lambda) <= 1e-9 * std::max(next, 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

double spectral_norm_matrix(const Tensor& t) {
    if (t.order() != 2) throw DimensionError("spectral norm defined for order-2 tensors only");
    return spectral_norm_matrix(t.to_matrix());
}

}  // namespace scoreland
