#pragma once

#include "ssm/kalman.hpp"
#include "ssm/model.hpp"
#include "ssm/time_series.hpp"
#include "ssm/types.hpp"

#include <cstdint>
#include <vector>

namespace ssm {

/// Smoothed states, disturbances and their variances.
struct SmoothResult {
    Matrix alphahat;              // m x n
    std::vector<Matrix> V;        // m x m per time
    Matrix epshat;                // p x n
    std::vector<Matrix> epsvar;   // p x p per time
    Matrix etahat;                // r x n
    std::vector<Matrix> etavar;   // r x r per time
    /// Smoothing cumulants r_{t-1} and N_{t-1} at each time, in the model's state space.
    Matrix r;
    std::vector<Matrix> N;
    FilterResult filter;
};

/// Means only.
struct FastSmoothResult {
    Matrix alphahat;
    Matrix epshat;
    Matrix etahat;
};

[[nodiscard]] SmoothResult smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts = {});

struct StateSmooth {
    Matrix alphahat;
    std::vector<Matrix> V;
};
[[nodiscard]] StateSmooth state_smooth(const TimeSeriesData& y, const StateSpaceModel& model,
                                       const FilterOptions& opts = {});

struct DisturbanceSmooth {
    Matrix epshat;
    std::vector<Matrix> epsvar;
    Matrix etahat;
    std::vector<Matrix> etavar;
};
[[nodiscard]] DisturbanceSmooth disturb_smooth(const TimeSeriesData& y, const StateSpaceModel& model,
                                               const FilterOptions& opts = {});

[[nodiscard]] FastSmoothResult fast_smooth(const TimeSeriesData& y, const StateSpaceModel& model,
                                           const FilterOptions& opts = {});
[[nodiscard]] Matrix fast_state_smooth(const TimeSeriesData& y, const StateSpaceModel& model,
                                       const FilterOptions& opts = {});

/// Fast smoothing of a filtered data set.
[[nodiscard]] FastSmoothResult fast_smooth(const FilterResult& filter);

/// Fast smoothing of further data sets reusing the gains of `filter`.
/// Each data set must share the missing pattern the filter was run on.
[[nodiscard]] FastSmoothResult fast_smooth_with_gains(const Matrix& y, const FilterResult& filter);

/// Smooths several data sets sharing one missing pattern with a single filter pass.
[[nodiscard]] std::vector<FastSmoothResult> batch_smooth(const std::vector<Matrix>& ys, const StateSpaceModel& model,
                                                         Execution exec = Execution::Parallel,
                                                         const FilterOptions& opts = {});

/// Draws from the smoothing distribution (alpha, eps, eta) given y.
struct Draws {
    std::vector<Matrix> alpha;
    std::vector<Matrix> eps;
    std::vector<Matrix> eta;
};

struct SimOptions {
    bool antithetic = false;
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
    FilterOptions filter;
};

[[nodiscard]] Draws sim_smooth(const TimeSeriesData& y, const StateSpaceModel& model, Eigen::Index N,
                               const SimOptions& opts = {});

struct SampleOptions {
    std::uint64_t seed = 0;
    /// Variance used for diffuse initial elements.
    double diffuse_var = 0.0;
    Execution exec = Execution::Parallel;
};

/// Unconditional draws of y, alpha, eps and eta over n time points.
struct Samples {
    std::vector<Matrix> y;
    std::vector<Matrix> alpha;
    std::vector<Matrix> eps;
    std::vector<Matrix> eta;
};
[[nodiscard]] Samples sample(const StateSpaceModel& model, Eigen::Index n, Eigen::Index N,
                             const SampleOptions& opts = {});

} // namespace ssm
