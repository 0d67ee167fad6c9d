#include "ssm/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ssm {

Vector poly_mul(const Vector& a, const Vector& b) {
    if (a.size() == 0 || b.size() == 0) return Vector();
    Vector out = Vector::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i, b.size()) += a(i) * b;
    return out;
}

Vector poly_pow(const Vector& a, int k) {
    if (k < 0) throw ArgumentError("negative polynomial power");
    Vector out = Vector::Ones(1);
    for (int i = 0; i < k; ++i) out = poly_mul(out, a);
    return out;
}

Vector poly_trim(const Vector& a, double tol) {
    Eigen::Index n = a.size();
    while (n > 1 && std::abs(a(n - 1)) <= tol) --n;
    return a.head(n);
}

std::complex<double> poly_eval(const Vector& a, std::complex<double> z) {
    std::complex<double> s = 0.0;
    for (Eigen::Index i = a.size(); i-- > 0;) s = s * z + a(i);
    return s;
}

std::vector<std::complex<double>> poly_roots(const Vector& a) {
    const Vector c = poly_trim(a);
    const Eigen::Index deg = c.size() - 1;
    if (deg < 1) return {};
    Matrix comp = Matrix::Zero(deg, deg);
    for (Eigen::Index j = 0; j < deg; ++j) comp(0, j) = -c(deg - 1 - j) / c(deg);
    for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Matrix> es(comp, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index i = 0; i < deg; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

Vector poly_from_inverse_roots(const std::vector<std::complex<double>>& roots) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Ones(1);
    for (const auto& r : roots) {
        Eigen::VectorXcd nc = Eigen::VectorXcd::Zero(c.size() + 1);
        nc.head(c.size()) += c;
        nc.tail(c.size()) -= c / r;
        c = nc;
    }
    return c.real();
}

Vector diff_poly(int d) { return poly_pow(Vector{{1.0, -1.0}}, d); }

Vector seasonal_sum_poly(int s, int D) {
    if (s < 1) throw ArgumentError("seasonal period must be positive");
    return poly_pow(Vector::Ones(s), D);
}

Vector spread_poly(const Vector& a, int s) {
    Vector out = Vector::Zero(s * (a.size() - 1) + 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) out(i * s) = a(i);
    return out;
}

Matrix lyapunov(const Matrix& T, const Matrix& W, double tol) {
    Matrix A = T;
    Matrix P = W;
    for (int it = 0; it < 200; ++it) {
        const Matrix step = A * P * A.transpose();
        P += step;
        A = A * A;
        if (!P.allFinite()) break;
        if (step.cwiseAbs().maxCoeff() <= tol * (1.0 + P.cwiseAbs().maxCoeff())) {
            P = 0.5 * (P + P.transpose());
            // close to a unit root the doubling sum loses definiteness to rounding
            Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, P.trace()))
                throw NumericError("stationary variance is numerically indefinite: transition is close to a unit root");
            return P;
        }
    }
    throw NumericError("stationary variance does not exist: transition is not stable");
}

double spectral_radius(const Matrix& T) {
    if (T.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(T, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace ssm
