#include "ssm/aux_math.hpp"

#include "ssm/detail/parallel.hpp"

#include <string>

namespace ssm {

using Eigen::Index;

MeanCov meancov(const std::vector<Matrix>& x, bool with_cov, Execution exec) {
    if (x.empty()) throw ArgumentError("meancov: no replicates");
    const Index m = x.front().rows(), n = x.front().cols();
    for (const auto& r : x)
        if (r.rows() != m || r.cols() != n) throw ArgumentError("meancov: replicates differ in shape");
    const auto N = static_cast<Index>(x.size());
    if (with_cov && N < 2) throw ArgumentError("meancov: covariance needs at least 2 replicates");

    MeanCov out;
    out.mean = Matrix::Zero(m, n);
    for (const auto& r : x) out.mean += r;
    out.mean /= static_cast<double>(N);
    if (!with_cov) return out;

    out.cov.assign(static_cast<std::size_t>(n), Matrix());
    detail::for_replicates(n, exec, [&](Index t) {
        Matrix D(m, N);
        for (Index k = 0; k < N; ++k) D.col(k) = x[static_cast<std::size_t>(k)].col(t) - out.mean.col(t);
        Matrix C = D * D.transpose() / static_cast<double>(N - 1);
        out.cov[static_cast<std::size_t>(t)] = 0.5 * (C + C.transpose());
    });
    return out;
}

namespace {

void check_square(const Matrix& A, Index m, const char* who) {
    if (A.rows() != A.cols()) throw ArgumentError(std::string(who) + ": A must be square");
    if (A.rows() != m) throw ArgumentError(std::string(who) + ": A and x differ in dimension");
}

} // namespace

Vector diaginprod(const Matrix& A, const Matrix& x1, const std::optional<Matrix>& x2, Execution exec) {
    check_square(A, x1.rows(), "diaginprod");
    if (x2 && (x2->rows() != x1.rows() || x2->cols() != x1.cols()))
        throw ArgumentError("diaginprod: x1 and x2 differ in shape");
    Vector out(x1.cols());
    detail::for_replicates(x1.cols(), exec, [&](Index j) {
        const Vector d = x2 ? Vector(x1.col(j) - x2->col(j)) : Vector(x1.col(j));
        out(j) = d.dot(A * d);
    });
    return out;
}

Matrix crossinprod(const Matrix& A, const Matrix& x1, const Matrix& x2, Execution exec) {
    check_square(A, x1.rows(), "crossinprod");
    if (x2.rows() != x1.rows()) throw ArgumentError("crossinprod: x1 and x2 differ in dimension");
    Matrix out(x2.cols(), x1.cols());
    detail::for_replicates(x1.cols(), exec, [&](Index j) {
        for (Index i = 0; i < x2.cols(); ++i) {
            const Vector d = x1.col(j) - x2.col(i);
            out(i, j) = d.dot(A * d);
        }
    });
    return out;
}

} // namespace ssm
