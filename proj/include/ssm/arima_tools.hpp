#pragma once

#include "ssm/estimation.hpp"
#include "ssm/model.hpp"
#include "ssm/time_series.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssm {

/// (1 - B)^d (1 - B^s)^D applied to an ARMA(p,q) x (P,Q)_s process.
struct ArimaSpec {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 1;
    bool mean = false;

    static ArimaSpec airline(int s = 12);
    [[nodiscard]] std::string str() const;
    friend bool operator==(const ArimaSpec&, const ArimaSpec&) = default;
};

/// The catalog model for a spec: arma, arima or sarima as the orders require.
[[nodiscard]] StateSpaceModel arima_model(const ArimaSpec& spec);

// ---------------------------------------------------------------- Hillmer-Tiao

struct HtdResult {
    /// Component names in order: trend, seasonal, transitory ..., then "extra MA" when present.
    std::vector<std::string> names;
    /// MA polynomial of each component, increasing order with leading 1.
    std::vector<Vector> theta;
    /// Innovation variance of each component, irregular last.
    Vector ksivar;
    /// Full AR polynomial of each component (differencing times stationary factor); [1] for extra MA.
    std::vector<Vector> ar;
    /// Extra AR factors as passed in, for the components model.
    std::vector<Vector> phi;
};

/// Canonical decomposition of the model (1 - B)^d (1 - B^s)^D prod Phi_k(B) y = Theta(B) a, var(a) = etavar.
/// Phi[0] is an extra trend AR factor, Phi[1] seasonal, later entries transitory components;
/// empty entries mean none. Throws DomainError when the canonical irregular variance is negative.
[[nodiscard]] HtdResult htd(int d, int D, int s, const std::vector<Vector>& Phi, const Vector& Theta,
                            double etavar = 1.0);

/// |P(e^{iw})|^2 at the given frequencies.
[[nodiscard]] Vector power_transfer(const Vector& poly, const Vector& freqs);

/// Pseudo-spectrum of each component and of the irregular on the given frequencies,
/// one row per component (irregular last).
[[nodiscard]] Matrix htd_component_spectra(const HtdResult& h, const Vector& freqs);

/// Decomposes an estimated ARIMA-type model (arma, arima, sarima, airline) into an
/// ARIMA components model (catalog code arimacom).
[[nodiscard]] StateSpaceModel ssmhtd(const StateSpaceModel& model);

// ---------------------------------------------------------------- selection

struct DiffDegree {
    int d = 0;
    int D = 0;
    bool mean = false;
    std::vector<std::string> diagnostics;
};

/// Unit root detection by AR root magnitudes; `ub` holds the regular and seasonal thresholds.
[[nodiscard]] DiffDegree diffdegree(const TimeSeriesData& y, std::optional<int> s = std::nullopt,
                                    std::pair<double, double> ub = {0.97, 0.88}, double tsig = 1.5);

struct ArmaCell {
    int p = 0, q = 0, P = 0, Q = 0;
    double bic = kNaN;
    bool converged = false;
    /// Empty when the fit succeeded.
    std::string error;
};

struct ArmaDegree {
    int p = 0, q = 0, P = 0, Q = 0;
    double bic = kNaN;
    std::vector<ArmaCell> cells;
    std::vector<std::string> diagnostics;

    /// Regular grid of BIC values, (p, q) for the given seasonal orders; NaN where a fit failed.
    [[nodiscard]] Matrix bic_grid(int P = 0, int Q = 0) const;
};

struct ArmaDegreeOptions {
    std::optional<int> s;
    bool mean = false;
    int mr = 3;
    int ms = 1;
    FitOptions fit;
    /// Initial value broadcast to every parameter of each cell.
    double param0 = 0.1;
};

/// Fits every (S)ARMA order in the grid and picks the smallest BIC; ties go to smaller
/// p + q (+ P + Q), then smaller q (+ Q).
[[nodiscard]] ArmaDegree armadegree(const TimeSeriesData& y, const ArmaDegreeOptions& opts = {});

struct ArimaSelectOptions {
    std::pair<double, double> ub = {0.97, 0.88};
    double tsig = 1.5;
    int mr = 3;
    int ms = 1;
    FitOptions fit;
};

/// Differencing orders and mean from diffdegree, then ARMA orders from armadegree on the differenced series.
[[nodiscard]] ArimaSpec arimaselect(const TimeSeriesData& y, std::optional<int> s = std::nullopt,
                                    const ArimaSelectOptions& opts = {});

/// (1 - B)^d (1 - B^s)^D y; the result is shorter by d + s D.
[[nodiscard]] TimeSeriesData difference(const TimeSeriesData& y, int d, int D = 0, int s = 1);

/// True when the family fits the levels better than the logs (BIC with the Jacobian of the log).
[[nodiscard]] bool loglevel(const TimeSeriesData& y, const ArimaSpec& family, const FitOptions& opts = {});

// ---------------------------------------------------------------- polynomials and forecasts

/// prod_i (1 - r_i B) with n roots r_i whose magnitudes are uniform in [lo, hi]; complex roots
/// come in conjugate pairs. Returns increasing-order coefficients with leading 1.
[[nodiscard]] Vector randarma(int n, std::pair<double, double> r, std::uint64_t seed = 0);

struct OosForecast {
    std::vector<Eigen::Index> h;
    /// Forecast origins: the number of observations each forecast conditions on.
    std::vector<Eigen::Index> origins;
    /// One p x origins matrix per horizon.
    std::vector<Matrix> yf;
    std::vector<Matrix> err;
    /// Cumulative sum over origins of squared errors summed over variables; 1 x origins per horizon.
    std::vector<RowVector> SS;
};

/// Forecasts from every origin n - n1, ..., n - max(h) at each horizon, with the model held fixed.
[[nodiscard]] OosForecast oosforecast(const TimeSeriesData& y, const StateSpaceModel& model, Eigen::Index n1,
                                      const std::vector<Eigen::Index>& h, Execution exec = Execution::Parallel);

} // namespace ssm
