#include "scoreland/teacher.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scoreland/rng.hpp"

namespace scoreland {

double activate(Activation g, double t) {
    switch (g) {
        case Activation::ReLU:
            return t > 0.0 ? t : 0.0;
        case Activation::Softplus:
            // log(1 + e^t), overflow-safe
            return t > 30.0 ? t : std::log1p(std::exp(t));
        case Activation::Quartic:
            return t * t * t * t;
    }
    return 0.0;
}

double activate_grad(Activation g, double t) {
    switch (g) {
        case Activation::ReLU:
            return t > 0.0 ? 1.0 : 0.0;
        case Activation::Softplus:
            return 1.0 / (1.0 + std::exp(-t));
        case Activation::Quartic:
            return 4.0 * t * t * t;
    }
    return 0.0;
}

double activate_fourth(Activation g, double t) {
    switch (g) {
        case Activation::Softplus: {
            const double s = 1.0 / (1.0 + std::exp(-t));
            return s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s);
        }
        case Activation::Quartic:
            return 24.0;
        case Activation::ReLU:
            throw NonSmoothActivation("ReLU has no pointwise fourth derivative");
    }
    return 0.0;
}

bool is_smooth(Activation g) { return g != Activation::ReLU; }

const char* activation_name(Activation g) {
    switch (g) {
        case Activation::ReLU: return "relu";
        case Activation::Softplus: return "softplus";
        case Activation::Quartic: return "quartic";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "softplus") return Activation::Softplus;
    if (name == "quartic") return Activation::Quartic;
    throw ConfigError("unknown activation: " + name);
}

Vector generate(const TeacherNet& teacher, const Matrix& X, std::uint64_t noise_seed) {
    const int n = static_cast<int>(X.rows());
    const int k = static_cast<int>(teacher.w_star.size());
    if (teacher.a_star.rows() != k)
        throw DimensionError("teacher weight/row count mismatch");
    if (teacher.a_star.cols() != X.cols())
        throw DimensionError("teacher input dimension does not match samples");

    const Matrix Z = X * teacher.a_star.transpose();  // n x k pre-activations
    Vector y(n);
    Rng rng(noise_seed);
    for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i)
            acc += teacher.w_star(i) * activate(teacher.activation, Z(s, i));
        if (teacher.noise_std > 0.0) acc += teacher.noise_std * rng.normal();
        y(s) = acc;
    }
    return y;
}

Dataset make_dataset(const TeacherNet& teacher, const InputDistribution& dist,
                     int n, std::uint64_t seed) {
    Dataset data;
    data.seed = seed;
    data.X = sample_input(dist, n, derive_seed(seed, 0));
    data.y = generate(teacher, data.X, derive_seed(seed, 1));
    return data;
}

TeacherStats estimate_kappa(const TeacherNet& teacher, const InputDistribution& dist,
                            int n_mc, std::uint64_t seed) {
    if (!is_smooth(teacher.activation))
        throw NonSmoothActivation("estimate_kappa requires a smooth activation");
    if (n_mc < 10000) throw ConfigError("estimate_kappa requires n_mc >= 10^4");

    const int k = static_cast<int>(teacher.w_star.size());
    const Matrix X = sample_input(dist, n_mc, seed);
    const Matrix Z = X * teacher.a_star.transpose();

    TeacherStats stats;
    stats.kappa = Vector::Zero(k);
    stats.kappa_se = Vector::Zero(k);
    for (int i = 0; i < k; ++i) {
        double mean = 0.0, m2 = 0.0;
        for (int s = 0; s < n_mc; ++s) {
            const double v = activate_fourth(teacher.activation, Z(s, i));
            const double delta = v - mean;
            mean += delta / static_cast<double>(s + 1);
            m2 += delta * (v - mean);
        }
        const double var = m2 / static_cast<double>(n_mc - 1);
        stats.kappa(i) = teacher.w_star(i) * mean;
        stats.kappa_se(i) =
            std::abs(teacher.w_star(i)) * std::sqrt(var / static_cast<double>(n_mc));
    }
    return stats;
}

namespace {

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    const int d = static_cast<int>(data.X.cols());
    for (int j = 0; j < d; ++j) out << "x_" << j << ",";
    out << "y\n";
    for (int s = 0; s < data.X.rows(); ++s) {
        for (int j = 0; j < d; ++j) out << full_precision(data.X(s, j)) << ",";
        out << full_precision(data.y(s)) << "\n";
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset CSV is empty");
    int d = 0;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) {
            if (col.rfind("x_", 0) == 0) ++d;
        }
    }
    if (d == 0) throw ConfigError("dataset CSV header has no x_ columns");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != d + 1)
            throw ConfigError("dataset CSV row width mismatch");
        rows.push_back(std::move(row));
    }

    Dataset data;
    data.X = Matrix(static_cast<int>(rows.size()), d);
    data.y = Vector(static_cast<int>(rows.size()));
    for (int s = 0; s < static_cast<int>(rows.size()); ++s) {
        for (int j = 0; j < d; ++j) data.X(s, j) = rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
        data.y(s) = rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)];
    }
    return data;
}

}  // namespace scoreland
