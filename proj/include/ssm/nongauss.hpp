#pragma once

#include "ssm/kalman.hpp"
#include "ssm/model.hpp"
#include "ssm/smoother.hpp"
#include "ssm/time_series.hpp"

namespace ssm {

struct ApproxOptions {
    /// Convergence when the largest change of the signal falls below tol.
    double tol = 1e-7;
    int maxiter = 100;
    FilterOptions filter;
};

/// Linear Gaussian model sharing mode and curvature with a non-Gaussian model.
struct GaussApproximation {
    /// Gaussian model with the approximating variances stored as dynamic H and Q.
    /// Its update functions are dropped: it is a snapshot at the current parameters.
    StateSpaceModel model;
    /// Pseudo-observations; equal to y on rows without an exponential family density.
    TimeSeriesData ytilde;
    /// Smoothed states of the approximating model at the mode.
    Matrix alphahat;
    int iterations = 0;
    bool converged = true;
};

/// Thrown when the approximation does not converge; carries the last iterate.
class ApproximationError : public NumericError {
public:
    ApproximationError(const std::string& what, GaussApproximation last)
        : NumericError(what), last_(std::move(last)) {}
    [[nodiscard]] const GaussApproximation& last() const { return last_; }

private:
    GaussApproximation last_;
};

/// Iterated mode-matching approximation. `alpha0` (m x n, may be empty) gives the
/// starting state path. A Gaussian model is returned unchanged with ytilde = y.
[[nodiscard]] GaussApproximation gauss_approximate(const TimeSeriesData& y, const StateSpaceModel& model,
                                                   const Matrix& alpha0 = {}, const ApproxOptions& opts = {});

/// Per-draw log importance weights log p(y, eta) - log g(ytilde, eta | states) for draws
/// from the approximating model's smoothing distribution.
[[nodiscard]] Vector log_weights(const StateSpaceModel& model, const GaussApproximation& approx,
                                 const TimeSeriesData& y, const Draws& draws, Execution exec = Execution::Parallel);

/// log of the mean importance weight, computed with max subtraction.
[[nodiscard]] double logprobrat(const StateSpaceModel& model, const GaussApproximation& approx,
                                const TimeSeriesData& y, const Draws& draws, Execution exec = Execution::Parallel);

struct ImportanceOptions {
    Eigen::Index nsamp = 500;
    bool antithetic = true;
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
};

struct NonGaussianLoglik {
    double loglik = 0.0;
    double gaussian = 0.0;    // approximating model at ytilde
    double correction = 0.0;  // logprobrat
};

/// Importance-sampling log likelihood of a non-Gaussian model at an existing approximation.
[[nodiscard]] NonGaussianLoglik importance_loglik(const TimeSeriesData& y, const StateSpaceModel& model,
                                                  const GaussApproximation& approx, const ImportanceOptions& opts = {});

} // namespace ssm
