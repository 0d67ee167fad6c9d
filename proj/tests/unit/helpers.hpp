#pragma once

#include "ssm/model.hpp"
#include "ssm/time_series.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using ssm::BoolMatrix;
using ssm::DynamicMatrix;
using ssm::Matrix;
using ssm::Vector;

inline Matrix random_matrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(g);
    return m;
}

inline Matrix random_psd(std::mt19937_64& g, Eigen::Index k, double floor = 0.2) {
    const Matrix a = random_matrix(g, k, k, 0.7);
    Matrix out = a * a.transpose();
    out.diagonal().array() += floor;
    return out;
}

inline DynamicMatrix dynamic_of(const std::vector<Matrix>& seq) {
    const Matrix& base = seq.front();
    BoolMatrix none = BoolMatrix::Constant(base.rows(), base.cols(), false);
    BoolMatrix all = BoolMatrix::Constant(base.rows(), base.cols(), true);
    Matrix dvec(base.size(), static_cast<Eigen::Index>(seq.size()));
    for (std::size_t t = 0; t < seq.size(); ++t)
        dvec.col(static_cast<Eigen::Index>(t)) = Eigen::Map<const Vector>(seq[t].data(), seq[t].size());
    return DynamicMatrix(base, none, all, dvec);
}

struct ModelShape {
    Eigen::Index m = 3, p = 2, r = 2, n = 12;
    Eigen::Index diffuse = 0;
    bool dynamic = false;
    bool full_H = false;
    bool intercept = false;
};

/// A random Gaussian model; the first `diffuse` states are diffuse random walks.
inline ssm::StateSpaceModel random_model(const ModelShape& s, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    ssm::StateSpaceModel mod;
    auto make = [&](auto gen) {
        if (!s.dynamic) return DynamicMatrix(gen());
        std::vector<Matrix> seq;
        for (Eigen::Index t = 0; t < s.n; ++t) seq.push_back(gen());
        return dynamic_of(seq);
    };
    mod.Z = make([&] { return random_matrix(g, s.p, s.m); });
    mod.H = make([&] {
        if (s.full_H) return random_psd(g, s.p);
        Matrix h = Matrix::Zero(s.p, s.p);
        for (Eigen::Index i = 0; i < s.p; ++i) h(i, i) = 0.3 + std::abs(random_matrix(g, 1, 1)(0));
        return h;
    });
    mod.T = make([&] {
        Matrix t = random_matrix(g, s.m, s.m, 0.3);
        for (Eigen::Index i = 0; i < s.diffuse; ++i) {
            t.row(i).setZero();
            t(i, i) = 1.0;
        }
        return t;
    });
    mod.R = DynamicMatrix(random_matrix(g, s.m, s.r));
    mod.Q = make([&] { return random_psd(g, s.r); });
    mod.c = make([&] { return s.intercept ? random_matrix(g, s.m, 1, 0.5) : Matrix(Matrix::Zero(s.m, 1)); });
    Matrix a1 = random_matrix(g, s.m, 1);
    Matrix P1 = Matrix::Zero(s.m, s.m);
    const Eigen::Index f = s.m - s.diffuse;
    if (f > 0) P1.bottomRightCorner(f, f) = random_psd(g, f);
    for (Eigen::Index i = 0; i < s.diffuse; ++i) {
        P1(i, i) = ssm::kInf;
        a1(i, 0) = 0.0;
    }
    mod.a1 = DynamicMatrix(a1);
    mod.P1 = DynamicMatrix(P1);
    return mod;
}

inline ssm::TimeSeriesData random_data(Eigen::Index p, Eigen::Index n, std::uint64_t seed, double missing_rate = 0.0) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u;
    Matrix y = random_matrix(g, p, n, 2.0);
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index i = 0; i < p; ++i)
            if (u(g) < missing_rate) y(i, t) = ssm::kNaN;
    return ssm::TimeSeriesData(y);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return ssm::kInf;
    return (a - b).cwiseAbs().maxCoeff();
}

/// Columns of a CSV file with a header row; empty cells and NA become NaN.
inline std::vector<std::vector<double>> read_columns(const std::string& path, std::vector<std::string>* header = nullptr) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::vector<std::vector<double>> cols(names.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',') && k < cols.size()) {
            cols[k++].push_back(cell.empty() || cell == "NA" ? ssm::kNaN : std::stod(cell));
        }
    }
    if (header) *header = names;
    return cols;
}

inline std::string data_path(const std::string& file) { return std::string(SSM_TEST_DATA) + "/" + file; }

} // namespace testing
