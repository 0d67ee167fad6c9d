#pragma once

#include "ssm/types.hpp"

#include <optional>
#include <vector>

namespace ssm {

/// Replicates x[k] (k = 0..N-1), each m x n; column t of every replicate forms one vector set.
struct MeanCov {
    /// m x n
    Matrix mean;
    /// n matrices, each m x m, with N - 1 denominator. Empty when not requested.
    std::vector<Matrix> cov;
};

[[nodiscard]] MeanCov meancov(const std::vector<Matrix>& x, bool with_cov = true,
                              Execution exec = Execution::Parallel);

/// out[j] = (x1.col(j) - x2.col(j))' A (x1.col(j) - x2.col(j)); x2 defaults to zero.
[[nodiscard]] Vector diaginprod(const Matrix& A, const Matrix& x1, const std::optional<Matrix>& x2 = std::nullopt,
                                Execution exec = Execution::Parallel);

/// Every pairing: out(i, j) = (x1.col(j) - x2.col(i))' A (x1.col(j) - x2.col(i)); n2 x n1.
[[nodiscard]] Matrix crossinprod(const Matrix& A, const Matrix& x1, const Matrix& x2,
                                 Execution exec = Execution::Parallel);

} // namespace ssm
