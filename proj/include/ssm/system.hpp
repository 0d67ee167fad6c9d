#pragma once

#include "ssm/model.hpp"
#include "ssm/types.hpp"

#include <vector>

namespace ssm {

/// A model evaluated at every time point, ready for the recursions.
///
/// Each sequence holds one matrix per stored time point; lookups past the end
/// reuse the last one. When some H_t is not diagonal the observation noise is
/// moved into the state (see `augmented`), so H is always diagonal here.
struct System {
    Eigen::Index p = 0;
    Eigen::Index m = 0;
    Eigen::Index r = 0;
    std::vector<Matrix> Z, H, T, R, Q, RQR;
    std::vector<Vector> c;
    Vector a1;
    /// Finite part of P1; diffuse entries are zero.
    Matrix P1;
    /// Binary diagonal marking diffuse initial elements.
    Matrix Pinf1;

    /// True when the state carries the observation noise in its last p entries.
    bool augmented = false;
    /// State and disturbance dimensions of the originating model.
    Eigen::Index m_model = 0;
    Eigen::Index r_model = 0;

    template <class Seq>
    static const auto& at(const Seq& s, Eigen::Index t) {
        const auto n = static_cast<Eigen::Index>(s.size());
        return s[static_cast<std::size_t>(t < n ? t : n - 1)];
    }
    [[nodiscard]] const Matrix& Zt(Eigen::Index t) const { return at(Z, t); }
    [[nodiscard]] const Matrix& Ht(Eigen::Index t) const { return at(H, t); }
    [[nodiscard]] const Matrix& Tt(Eigen::Index t) const { return at(T, t); }
    [[nodiscard]] const Matrix& Rt(Eigen::Index t) const { return at(R, t); }
    [[nodiscard]] const Matrix& Qt(Eigen::Index t) const { return at(Q, t); }
    [[nodiscard]] const Matrix& RQRt(Eigen::Index t) const { return at(RQR, t); }
    [[nodiscard]] const Vector& ct(Eigen::Index t) const { return at(c, t); }
    [[nodiscard]] bool has_diffuse() const { return Pinf1.size() > 0 && Pinf1.diagonal().maxCoeff() > 0.0; }

    /// Recomputes RQR and, when needed, applies the noise augmentation.
    void finalize();
};

/// Evaluates the model's matrices over its stored time points.
[[nodiscard]] System realize(const StateSpaceModel& model);

/// Splits P1 into its finite part and the binary diffuse marker.
void split_diffuse(const Matrix& P1, Matrix& finite, Matrix& pinf);

} // namespace ssm
