#pragma once

#include "ssm/distribution.hpp"
#include "ssm/model.hpp"
#include "ssm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssm {

/// Arguments of a predefined model. Only the fields a code uses are read;
/// a required field left empty is an ArgumentError.
struct CatalogArgs {
    std::optional<Eigen::Index> p;  // number of variables, or AR order for ARIMA codes
    std::optional<Eigen::Index> d;
    std::optional<Eigen::Index> q;
    std::optional<Eigen::Index> P;
    std::optional<Eigen::Index> D;
    std::optional<Eigen::Index> Q;
    std::optional<Eigen::Index> s;
    std::optional<Eigen::Index> n;
    std::optional<Eigen::Index> h;  // multinomial cells
    std::optional<bool> mean;
    std::optional<bool> cycle;
    /// Correlation flags. For mvseasonal an empty vector means no disturbance.
    std::optional<BoolVector> cov;

    std::string type;                // seasonal or intervention type
    std::vector<std::string> types;  // mvintv, one per variable
    std::string lvl;                 // stsm: "level" or "trend"
    std::vector<Eigen::Index> tau;   // 1-based onset times

    Matrix x;                        // regressors, one row per variable
    std::vector<std::string> names;  // regressor names
    BoolMatrix dep;                  // mvreg dependence, p x k

    Matrix A;                        // commonlvls A*
    Vector a;                        // commonlvls a*

    Vector k;                        // trials
    std::optional<double> nu;        // t degrees of freedom; estimated when absent
    Vector delta;                    // spline step lengths
    CustomExpFamily::Fn b, d2b, id2bdb, c;

    std::vector<Vector> phi;         // arimacom
    std::vector<Vector> theta;
    Vector ksivar;
};

/// Builds the predefined model named by `code`.
[[nodiscard]] StateSpaceModel predefined(const std::string& code, const CatalogArgs& args = {});

/// Every code `predefined` accepts.
[[nodiscard]] const std::vector<std::string>& catalog_codes();

/// Codes that are recognised but rejected as out of scope.
[[nodiscard]] const std::vector<std::string>& out_of_scope_codes();

/// Intervention regressor over n time points with 1-based onset tau.
[[nodiscard]] RowVector intv_variable(Eigen::Index n, const std::string& type, Eigen::Index tau);

struct SeasonalBlock {
    Matrix Z;
    Matrix T;
    Matrix R;
};

/// Structural matrices of a univariate seasonal component.
[[nodiscard]] SeasonalBlock seasonal_block(const std::string& type, Eigen::Index s);

/// One component of an ARIMA components model.
struct ArimaComponent {
    std::string name;
    Vector diff;  // nonstationary AR factor
    Vector phi;   // stationary AR factor
};

/// Components implied by the differencing and per-component extra AR factors:
/// trend (1 - B)^{trend_d} phi[0], seasonal (1 + ... + B^{s-1})^D phi[1], then one
/// per further factor. Components with a trivial AR part are left out.
[[nodiscard]] std::vector<ArimaComponent> arima_components(int trend_d, int D, int s, const std::vector<Vector>& phi);

} // namespace ssm
