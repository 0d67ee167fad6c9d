#pragma once

#include "ssm/types.hpp"

namespace ssm {

/// A p x n observation matrix; column t is y_t. Missing cells are flagged in a
/// parallel mask and hold NaN in `values`.
class TimeSeriesData {
public:
    TimeSeriesData() = default;

    /// Builds from a matrix where NaN marks a missing cell.
    explicit TimeSeriesData(Matrix values);

    TimeSeriesData(Matrix values, BoolMatrix missing);

    static TimeSeriesData from_row(const std::vector<double>& values);

    [[nodiscard]] Eigen::Index p() const { return values_.rows(); }
    [[nodiscard]] Eigen::Index n() const { return values_.cols(); }

    [[nodiscard]] const Matrix& values() const { return values_; }
    [[nodiscard]] const BoolMatrix& missing() const { return missing_; }

    [[nodiscard]] bool is_missing(Eigen::Index row, Eigen::Index t) const { return missing_(row, t); }
    [[nodiscard]] double operator()(Eigen::Index row, Eigen::Index t) const { return values_(row, t); }

    [[nodiscard]] bool any_missing() const { return missing_.any(); }
    [[nodiscard]] Eigen::Index observed_count() const;

    /// Returns a copy with `h` fully missing columns appended.
    [[nodiscard]] TimeSeriesData extended(Eigen::Index h) const;

    /// Returns the first `n` columns.
    [[nodiscard]] TimeSeriesData head(Eigen::Index n) const;

    /// Returns a copy with cell (row, t) marked missing.
    [[nodiscard]] TimeSeriesData with_missing(Eigen::Index row, Eigen::Index t) const;

private:
    Matrix values_;
    BoolMatrix missing_;
};

} // namespace ssm
