#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVector = std::vector<bool>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension or wiring mismatch between model parts.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, singular variances, failed convergence.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A parameter or input outside the domain of a transform or density.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value or arity.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A catalog code or feature that is recognised but deliberately not supported.
class OutOfScopeError : public Error {
public:
    using Error::Error;
};

/// A data file or data matrix that cannot be used.
class DataError : public Error {
public:
    using Error::Error;
};

/// Controls whether replicate-parallel kernels use OpenMP or the serial reference path.
enum class Execution { Serial, Parallel };

} // namespace ssm
