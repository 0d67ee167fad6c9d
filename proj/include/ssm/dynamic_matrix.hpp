#pragma once

#include "ssm/types.hpp"

namespace ssm {

/// A state space matrix that may vary with time and with the model parameters.
///
/// The value at time t is the stationary base `mat` with the cells flagged in
/// `dmmask` overwritten, in column-major order, by column t of `dvec`. Times
/// beyond the stored sequence reuse its last column. Cells flagged in `mmask`
/// and rows flagged in `dvmask` are the parameter-dependent parts written by
/// model update functions.
class DynamicMatrix {
public:
    DynamicMatrix() = default;
    explicit DynamicMatrix(Matrix mat);
    DynamicMatrix(Matrix mat, BoolMatrix mmask);
    DynamicMatrix(Matrix mat, BoolMatrix mmask, BoolMatrix dmmask, Matrix dvec, BoolVector dvmask = {});

    static DynamicMatrix zeros(Eigen::Index rows, Eigen::Index cols);

    [[nodiscard]] Eigen::Index rows() const { return mat_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return mat_.cols(); }
    /// Number of stored time points; 1 for stationary matrices.
    [[nodiscard]] Eigen::Index n() const { return is_stationary() ? 1 : dvec_.cols(); }
    /// Number of dynamic cells (rows of dvec).
    [[nodiscard]] Eigen::Index dynamic_count() const { return dvec_.rows(); }

    [[nodiscard]] bool is_stationary() const { return dvec_.rows() == 0; }
    [[nodiscard]] bool is_const() const;

    [[nodiscard]] const Matrix& mat() const { return mat_; }
    [[nodiscard]] const BoolMatrix& mmask() const { return mmask_; }
    [[nodiscard]] const BoolMatrix& dmmask() const { return dmmask_; }
    [[nodiscard]] const Matrix& dvec() const { return dvec_; }
    [[nodiscard]] const BoolVector& dvmask() const { return dvmask_; }

    [[nodiscard]] Eigen::Index variable_count() const { return mmask_.count(); }
    [[nodiscard]] Eigen::Index dynamic_variable_count() const;

    /// Value at 0-based time t.
    [[nodiscard]] Matrix at(Eigen::Index t) const;

    /// Writes the parameter-dependent stationary cells in column-major order.
    void set_variable(const Vector& values);

    /// Writes the parameter-dependent dynamic rows; `values` has one row per
    /// variable dynamic row and any number of time columns.
    void set_dynamic_variable(const Matrix& values);

    /// Replaces the stationary base (same shape). Used by model finalisation.
    void set_mat(Matrix mat);

    /// Extends the dynamic sequence to at least `n` columns by repeating its last column.
    void extend_to(Eigen::Index n);

    friend bool operator==(const DynamicMatrix& a, const DynamicMatrix& b);

private:
    void check_invariants() const;

    Matrix mat_;
    BoolMatrix mmask_;
    BoolMatrix dmmask_;
    Matrix dvec_;
    BoolVector dvmask_;
};

[[nodiscard]] DynamicMatrix horzcat(const DynamicMatrix& a, const DynamicMatrix& b);
[[nodiscard]] DynamicMatrix vertcat(const DynamicMatrix& a, const DynamicMatrix& b);
[[nodiscard]] DynamicMatrix blkdiag(const DynamicMatrix& a, const DynamicMatrix& b);

/// Column-major list of (row, col) positions flagged in a mask.
[[nodiscard]] std::vector<std::pair<Eigen::Index, Eigen::Index>> masked_cells(const BoolMatrix& mask);

} // namespace ssm
