#include "ssm/time_series.hpp"

#include <cmath>

namespace ssm {

TimeSeriesData::TimeSeriesData(Matrix values) : values_(std::move(values)) {
    missing_ = values_.unaryExpr([](double v) { return std::isnan(v); });
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
        for (Eigen::Index i = 0; i < values_.rows(); ++i)
            if (!missing_(i, j) && !std::isfinite(values_(i, j)))
                throw DataError("observation (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                ") is not finite");
}

TimeSeriesData::TimeSeriesData(Matrix values, BoolMatrix missing)
    : values_(std::move(values)), missing_(std::move(missing)) {
    if (values_.rows() != missing_.rows() || values_.cols() != missing_.cols())
        throw DataError("missing mask does not match data shape");
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (missing_(i, j))
                values_(i, j) = kNaN;
            else if (!std::isfinite(values_(i, j)))
                throw DataError("observation (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                ") is not finite");
        }
}

TimeSeriesData TimeSeriesData::from_row(const std::vector<double>& values) {
    Matrix m(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = values[i];
    return TimeSeriesData(std::move(m));
}

Eigen::Index TimeSeriesData::observed_count() const {
    return missing_.size() - missing_.count();
}

TimeSeriesData TimeSeriesData::extended(Eigen::Index h) const {
    Matrix v(p(), n() + h);
    v.leftCols(n()) = values_;
    v.rightCols(h).setConstant(kNaN);
    return TimeSeriesData(std::move(v));
}

TimeSeriesData TimeSeriesData::head(Eigen::Index count) const {
    return TimeSeriesData(Matrix(values_.leftCols(count)), BoolMatrix(missing_.leftCols(count)));
}

TimeSeriesData TimeSeriesData::with_missing(Eigen::Index row, Eigen::Index t) const {
    TimeSeriesData out = *this;
    out.values_(row, t) = kNaN;
    out.missing_(row, t) = true;
    return out;
}

} // namespace ssm
