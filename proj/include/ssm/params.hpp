#pragma once

#include "ssm/types.hpp"

#include <string>
#include <vector>

namespace ssm {

/// Maps a group of constrained parameter values onto the real line and back.
struct Transform {
    enum class Kind {
        HalfLog,   // value = exp(2 psi), used for variances
        Log,       // value = exp(psi)
        Identity,
        Arma,      // partial coefficients tanh(psi), expanded by Durbin-Levinson
        Df,        // value = 2 + exp(psi)
        Logistic,  // value = scale / (1 + exp(-psi))
        Cov,       // log-Cholesky; values are variances then lower-triangle covariances
    };

    Kind kind = Kind::Identity;
    /// For Arma: +1 gives AR coefficients of 1 - sum phi_j B^j, -1 gives MA
    /// coefficients of 1 + sum theta_j B^j.
    int sign = 1;
    /// Upper bound for Logistic.
    double scale = 1.0;

    static Transform half_log() { return {Kind::HalfLog}; }
    static Transform log() { return {Kind::Log}; }
    static Transform identity() { return {Kind::Identity}; }
    static Transform ar() { return {Kind::Arma, 1}; }
    static Transform ma() { return {Kind::Arma, -1}; }
    static Transform df() { return {Kind::Df}; }
    static Transform logistic(double upper = 1.0) { return {Kind::Logistic, 1, upper}; }
    static Transform cov() { return {Kind::Cov}; }

    /// Short code as used in model files: "1/2 log", "log", "identity", "arma", "df", "logistic", "cov".
    [[nodiscard]] std::string code() const;
    static Transform from_code(const std::string& code);

    friend bool operator==(const Transform&, const Transform&) = default;
};

/// Values of one group: throws DomainError (naming `names[i]`) when a value is outside the domain.
[[nodiscard]] Vector to_unconstrained(const Transform& tr, const Vector& values, const std::vector<std::string>& names);
[[nodiscard]] Vector from_unconstrained(const Transform& tr, const Vector& psi);

/// Partial autocorrelations to coefficients of 1 - sum phi_j B^j.
[[nodiscard]] Vector durbin_levinson(const Vector& partial);
/// Inverse of durbin_levinson; throws DomainError if the polynomial is not stationary.
[[nodiscard]] Vector inverse_durbin_levinson(const Vector& phi);

/// Number of covariance-group parameters for a k x k covariance matrix.
[[nodiscard]] inline Eigen::Index cov_param_count(Eigen::Index k) { return k * (k + 1) / 2; }
/// Covariance matrix from group values (variances then lower-triangle covariances, column-major).
[[nodiscard]] Matrix cov_from_values(const Vector& values);
[[nodiscard]] Vector values_from_cov(const Matrix& cov);

struct ParamGroup {
    Eigen::Index start = 0;
    Eigen::Index count = 0;
    Transform transform;
};

/// Named model parameters organised into transform groups.
class ParamSet {
public:
    ParamSet() = default;

    /// Appends a group; `values` defaults to the constrained image of psi = 0.
    void add_group(const std::vector<std::string>& names, const Transform& tr, const Vector& values = {});

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(names_.size()); }
    [[nodiscard]] bool empty() const { return names_.empty(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] const std::vector<ParamGroup>& groups() const { return groups_; }

    void set_values(const Vector& values);
    [[nodiscard]] Vector psi() const;
    void set_psi(const Vector& psi);
    /// Constrained values for an arbitrary psi vector, without modifying the set.
    [[nodiscard]] Vector values_for_psi(const Vector& psi) const;

    void rename(Eigen::Index i, std::string name) { names_.at(static_cast<std::size_t>(i)) = std::move(name); }
    [[nodiscard]] Eigen::Index index_of(const std::string& name) const;

    /// Keeps whole groups whose members are all flagged; partial groups are a structural error.
    [[nodiscard]] ParamSet subset(const BoolVector& keep) const;

    /// Concatenation; `pmasks[i]` lists the indices of the combined set coming from `sets[i]`.
    static ParamSet concat(const std::vector<const ParamSet*>& sets, std::vector<std::vector<Eigen::Index>>* pmasks);

private:
    std::vector<std::string> names_;
    Vector values_;
    std::vector<ParamGroup> groups_;
};

} // namespace ssm
