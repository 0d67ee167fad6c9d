#pragma once

#include "ssm/distribution.hpp"
#include "ssm/dynamic_matrix.hpp"
#include "ssm/params.hpp"
#include "ssm/types.hpp"

#include <array>
#include <bitset>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ssm {

/// Updatable model parts in canonical output order.
enum class Element : int { H, Z, T, R, Q, c, a1, P1, Hd, Zd, Td, Rd, Qd, cd, Hng, Qng };

inline constexpr int kElementCount = 16;
/// Elements carried as matrices (stationary and dynamic parts).
inline constexpr int kMatrixElementCount = 14;

[[nodiscard]] const char* element_code(Element e);

/// Which elements an update function writes.
class AdjacencyRow {
public:
    AdjacencyRow() = default;
    AdjacencyRow(std::initializer_list<Element> elems);

    /// Parses a concatenation of element codes in any order, e.g. "HQ", "Qd", "THng".
    /// Nonlinear codes (Znl, Tnl) are recognised and rejected.
    static AdjacencyRow parse(const std::string& text);

    [[nodiscard]] bool test(Element e) const { return bits_.test(static_cast<std::size_t>(e)); }
    void set(Element e, bool on = true) { bits_.set(static_cast<std::size_t>(e), on); }
    [[nodiscard]] bool none() const { return bits_.none(); }
    [[nodiscard]] std::string str() const;

    friend bool operator==(const AdjacencyRow&, const AdjacencyRow&) = default;

private:
    std::bitset<kElementCount> bits_;
};

/// Values returned by one update function.
///
/// Stationary elements take a single column of values for the variable cells;
/// dynamic elements take one row per variable dynamic row and one column per time.
struct UpdateOutput {
    std::array<Matrix, kMatrixElementCount> mats;
    std::array<bool, kMatrixElementCount> has{};
    std::vector<DistributionPtr> hng;
    std::vector<DistributionPtr> qng;
    bool has_hng = false;
    bool has_qng = false;

    void set(Element e, Matrix value);
    void set(Element e, const Vector& value) { set(e, Matrix(value)); }
    void set_ng(Element e, std::vector<DistributionPtr> dists);
};

using UpdateFunction = std::function<UpdateOutput(const Vector& param)>;

struct UpdateBinding {
    AdjacencyRow adj;
    UpdateFunction fn;
    /// Indices into the model's parameter set passed to `fn`, in order.
    std::vector<Eigen::Index> pmask;
};

/// A non-Gaussian density governing some rows of H or Q.
struct NonGaussianSpec {
    DistributionPtr dist;
    std::vector<Eigen::Index> rows;
    bool variable = false;
};

/// ARIMA structure of a component, needed by the Hillmer-Tiao decomposition.
/// The differencing operator is (1 - B)^d (1 + B + ... + B^{s-1})^D.
struct ArimaInfo {
    int d = 0;
    int D = 0;
    int s = 1;
    bool mean = false;
    /// Stationary AR polynomial, MA polynomial (increasing order, leading 1) and
    /// innovation variance at the given component parameters.
    std::function<void(const Vector& param, Vector& phi, Vector& theta, double& var)> polys;
};

struct Component {
    std::string name;
    std::string code;
    Eigen::Index state_begin = 0;
    Eigen::Index state_count = 0;
    Eigen::Index dist_begin = 0;
    Eigen::Index dist_count = 0;
    /// Observation disturbance only; carries no state and is not a signal.
    bool noise = false;
    std::vector<Eigen::Index> pmask;
    std::shared_ptr<const ArimaInfo> arima;
};

/// y_t = Z_t a_t + e_t,  a_{t+1} = c_t + T_t a_t + R_t n_t,  e ~ N(0,H_t), n ~ N(0,Q_t), a_1 ~ N(a1, P1).
/// Diffuse initial elements carry +inf on the diagonal of P1.
class StateSpaceModel {
public:
    std::string name;
    DynamicMatrix H, Z, T, R, Q, c, a1, P1;
    std::vector<NonGaussianSpec> Hng, Qng;
    std::vector<UpdateBinding> updates;
    ParamSet params;
    std::vector<Component> components;

    [[nodiscard]] Eigen::Index p() const { return Z.rows(); }
    [[nodiscard]] Eigen::Index m() const { return T.rows(); }
    [[nodiscard]] Eigen::Index r() const { return R.cols(); }
    [[nodiscard]] Eigen::Index w() const { return params.size(); }
    /// Number of diffuse initial elements.
    [[nodiscard]] Eigen::Index q() const;
    /// Longest stored dynamic sequence.
    [[nodiscard]] Eigen::Index n() const;
    [[nodiscard]] bool is_gaussian() const { return Hng.empty() && Qng.empty(); }

    [[nodiscard]] Vector psi() const { return params.psi(); }
    /// Sets untransformed parameter values and refreshes all variable parts.
    void set_param(const Vector& values);
    void set_psi(const Vector& psi);
    /// Re-applies the update functions at the current parameters.
    void refresh();
};

/// Returns `model` with parameters set from `psi` and the update functions applied.
[[nodiscard]] StateSpaceModel apply_updates(const StateSpaceModel& model, const Vector& psi);

/// Additive combination: Z side by side, T R Q P1 block diagonal, c and a1 stacked, H from the first model.
/// Later non-null H parts are dropped with a note appended to `warnings`.
[[nodiscard]] StateSpaceModel combine_additive(const std::vector<StateSpaceModel>& models,
                                               std::vector<std::string>* warnings = nullptr);

/// Every dimension or structure violation; empty for a well-formed model.
[[nodiscard]] std::vector<std::string> validate(const StateSpaceModel& model);

/// Throws StructuralError with the first diagnostic from validate.
void require_valid(const StateSpaceModel& model);

/// Per-component signals Z_t[:, S_k] alpha[S_k, t]; one p x n matrix per non-noise component.
[[nodiscard]] std::vector<Matrix> signal(const Matrix& alpha, const StateSpaceModel& model);
/// Univariate convenience: an M x n matrix, row k the k-th component signal.
[[nodiscard]] Matrix signal_rows(const Matrix& alpha, const StateSpaceModel& model);

} // namespace ssm
