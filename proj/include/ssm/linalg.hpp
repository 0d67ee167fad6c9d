#pragma once

#include "ssm/types.hpp"

#include <complex>
#include <vector>

namespace ssm {

/// Polynomials are coefficient vectors in increasing order: c(0) + c(1) x + ...

[[nodiscard]] Vector poly_mul(const Vector& a, const Vector& b);
[[nodiscard]] Vector poly_pow(const Vector& a, int k);
/// Drops trailing coefficients with magnitude <= tol.
[[nodiscard]] Vector poly_trim(const Vector& a, double tol = 0.0);
[[nodiscard]] std::complex<double> poly_eval(const Vector& a, std::complex<double> z);
/// All complex roots, by the eigenvalues of the companion matrix.
[[nodiscard]] std::vector<std::complex<double>> poly_roots(const Vector& a);
/// Real coefficients of prod_i (1 - z / r_i); complex roots must come in conjugate pairs.
[[nodiscard]] Vector poly_from_inverse_roots(const std::vector<std::complex<double>>& roots);

/// (1 - B)^d
[[nodiscard]] Vector diff_poly(int d);
/// (1 + B + ... + B^{s-1})^D
[[nodiscard]] Vector seasonal_sum_poly(int s, int D);
/// Polynomial in B^s from coefficients of B: 1 + a_1 B^s + a_2 B^{2s} ...
[[nodiscard]] Vector spread_poly(const Vector& a, int s);

/// Solves P = T P T' + W by doubling; throws NumericError when T is not stable.
[[nodiscard]] Matrix lyapunov(const Matrix& T, const Matrix& W, double tol = 1e-12);

[[nodiscard]] double spectral_radius(const Matrix& T);

} // namespace ssm
