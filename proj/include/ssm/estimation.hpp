#pragma once

#include "ssm/model.hpp"
#include "ssm/nongauss.hpp"
#include "ssm/time_series.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssm {

enum class Minimizer { Simplex, Bfgs };
enum class Display { Off, Notify, Final, Iter };

[[nodiscard]] Minimizer minimizer_from_string(const std::string& s);
[[nodiscard]] Display display_from_string(const std::string& s);

struct OptimOptions {
    /// Stop once the objective changes by less than tol.
    double tol = 1e-6;
    int maxiter = 500;
    Display disp = Display::Off;
    /// Gradient components of bfgs may be evaluated concurrently.
    Execution exec = Execution::Serial;
    /// Destination of progress messages; std::clog when null.
    std::ostream* log = nullptr;
};

struct TracePoint {
    int iteration = 0;
    long evaluations = 0;
    /// Best objective value seen so far.
    double best = 0.0;
};

struct OptimResult {
    Vector x;
    double fval = 0.0;
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

using Objective = std::function<double(const Vector&)>;

/// Nelder-Mead with reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
/// Non-finite objective values are treated as +inf.
[[nodiscard]] OptimResult minimize_simplex(const Objective& f, const Vector& x0, const OptimOptions& opts = {});

/// BFGS with central-difference gradients and backtracking line search.
[[nodiscard]] OptimResult minimize_bfgs(const Objective& f, const Vector& x0, const OptimOptions& opts = {});

[[nodiscard]] OptimResult minimize(Minimizer which, const Objective& f, const Vector& x0, const OptimOptions& opts = {});

/// Starting values and the parameters to estimate.
struct ParamStart {
    /// Untransformed starting values for every parameter; empty keeps the model's current values.
    Vector values;
    /// Parameters to estimate; empty estimates all.
    BoolVector free;

    /// Interprets the accepted matrix forms: empty (current values), 1 x 1 (broadcast),
    /// a w-vector in either orientation, or 2 x w (values, then a nonzero-means-free mask).
    static ParamStart from_matrix(const Matrix& spec, Eigen::Index w);
    static ParamStart mask(BoolVector free);
};

struct FitOptions {
    Minimizer fmin = Minimizer::Simplex;
    double tol = 1e-6;
    int maxiter = 500;
    Display disp = Display::Off;
    /// Importance draws for the final likelihood of a non-Gaussian model; 0 keeps the Laplace value.
    Eigen::Index nsamp = 500;
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
    ApproxOptions approx;
    std::ostream* log = nullptr;
};

struct FitReport {
    double logL = 0.0;
    double AIC = 0.0;
    double BIC = 0.0;
    /// Number of estimated parameters and the sample length used by the criteria.
    Eigen::Index w = 0;
    Eigen::Index n = 0;
    int iterations = 0;
    long evaluations = 0;
    bool converged = true;
    /// Approximating observations and model of a non-Gaussian fit.
    std::optional<TimeSeriesData> ytilde;
    std::optional<GaussApproximation> approx;
    std::vector<TracePoint> trace;
};

struct FitResult {
    StateSpaceModel model;
    FitReport report;
};

/// Log likelihood used as the estimation objective. For non-Gaussian models this is the
/// approximating Gaussian likelihood with the log weight at the mode added (Laplace form).
[[nodiscard]] double fit_objective_loglik(const TimeSeriesData& y, const StateSpaceModel& model,
                                          const Matrix& alpha0 = {}, const ApproxOptions& approx = {});

/// Maximum likelihood over the unconstrained parameters flagged in `start.free`.
[[nodiscard]] FitResult fit(const TimeSeriesData& y, const StateSpaceModel& model, const ParamStart& start = {},
                            const Matrix& alpha0 = {}, const FitOptions& opts = {});

/// (-2 logL + 2 w) / n and (-2 logL + w log n) / n.
[[nodiscard]] double aic(double logL, Eigen::Index w, Eigen::Index n);
[[nodiscard]] double bic(double logL, Eigen::Index w, Eigen::Index n);

} // namespace ssm
