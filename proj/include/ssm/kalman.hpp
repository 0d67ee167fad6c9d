#pragma once

#include "ssm/model.hpp"
#include "ssm/system.hpp"
#include "ssm/time_series.hpp"
#include "ssm/types.hpp"

#include <memory>
#include <vector>

namespace ssm {

struct FilterOptions {
    /// Diffuse step when F_inf > tol * (1 + |F|); the diffuse phase ends when max diag P_inf < tol.
    double diffuse_tol = 1e-8;
};

/// One observed scalar processed by the univariate filter.
struct ElementStep {
    Eigen::Index row = 0;
    double v = 0.0;
    double F = 0.0;
    double Finf = 0.0;
    Vector M;     // P z'
    Vector Minf;  // P_inf z', diffuse steps only
    bool diffuse = false;
    /// Degenerate (F = 0) observation carrying no information.
    bool skipped = false;
};

struct FilterResult {
    Eigen::Index n = 0;
    /// Predicted means a_1..a_{n+1}, one column each.
    Matrix a;
    /// Predicted variances P_1..P_{n+1}.
    std::vector<Matrix> P;
    /// Diffuse parts P_inf,1..P_inf,d.
    std::vector<Matrix> Pinf;
    /// Number of time points in the diffuse phase.
    Eigen::Index d = 0;
    bool diffuse_unresolved = false;
    /// Innovations y_t - Z_t a_t (NaN where missing) and their variances Z P Z' + H.
    Matrix v;
    std::vector<Matrix> F;
    std::vector<std::vector<ElementStep>> steps;
    double loglik = 0.0;
    /// Observed scalars contributing to the likelihood.
    Eigen::Index nobs = 0;
    std::shared_ptr<const System> sys;
};

[[nodiscard]] FilterResult kalman_filter(const Matrix& y, std::shared_ptr<const System> sys,
                                         const FilterOptions& opts = {});
[[nodiscard]] FilterResult kalman_filter(const TimeSeriesData& y, const StateSpaceModel& model,
                                         const FilterOptions& opts = {});

/// Diffuse log likelihood; throws if the model has non-Gaussian parts.
[[nodiscard]] double loglik(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts = {});

struct Forecast {
    /// p x h point forecasts and h forecast variance matrices.
    Matrix mean;
    std::vector<Matrix> var;
};

/// Forecasts h steps past the sample by filtering through appended missing values.
[[nodiscard]] Forecast forecast(const TimeSeriesData& y, const StateSpaceModel& model, Eigen::Index h,
                                const FilterOptions& opts = {});

/// Matrix of observations with NaN where missing.
[[nodiscard]] Matrix observations(const TimeSeriesData& y);

/// Rejects models whose observation or state noise is non-Gaussian.
void require_gaussian(const StateSpaceModel& model, const char* what);

} // namespace ssm
