#include "ssm/system.hpp"

#include <algorithm>
#include <cmath>

namespace ssm {

namespace {

std::vector<Matrix> sequence(const DynamicMatrix& d) {
    std::vector<Matrix> out;
    if (d.is_stationary()) {
        out.push_back(d.mat());
        return out;
    }
    out.reserve(static_cast<std::size_t>(d.n()));
    for (Eigen::Index t = 0; t < d.n(); ++t) out.push_back(d.at(t));
    return out;
}

bool diagonal(const Matrix& h) {
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        for (Eigen::Index i = 0; i < h.rows(); ++i)
            if (i != j && h(i, j) != 0.0) return false;
    return true;
}

Matrix blk(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

} // namespace

void split_diffuse(const Matrix& P1, Matrix& finite, Matrix& pinf) {
    const Eigen::Index m = P1.rows();
    finite = P1;
    pinf = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isinf(P1(i, i))) {
            pinf(i, i) = 1.0;
            finite.row(i).setZero();
            finite.col(i).setZero();
        }
    }
}

void System::finalize() {
    bool need_aug = false;
    for (const auto& h : H) need_aug = need_aug || !diagonal(h);
    if (need_aug && !augmented) {
        // e_t becomes state: y_t = [Z I] x_t, x_{t+1} tail = noise drawn with H_{t+1}
        std::vector<Matrix> z2, t2, r2, q2;
        std::vector<Vector> c2;
        const Matrix ip = Matrix::Identity(p, p);
        for (std::size_t k = 0; k < Z.size(); ++k) {
            Matrix zz(p, m + p);
            zz << Z[k], ip;
            z2.push_back(std::move(zz));
        }
        for (const auto& tt : T) t2.push_back(blk(tt, Matrix::Zero(p, p)));
        for (const auto& rr : R) r2.push_back(blk(rr, ip));
        const Eigen::Index nq = std::max<Eigen::Index>(static_cast<Eigen::Index>(Q.size()), static_cast<Eigen::Index>(H.size()));
        for (Eigen::Index t = 0; t < std::max<Eigen::Index>(nq, 1); ++t) q2.push_back(blk(Qt(t), Ht(t + 1)));
        for (const auto& cc : c) {
            Vector v = Vector::Zero(m + p);
            v.head(m) = cc;
            c2.push_back(std::move(v));
        }
        Vector a2 = Vector::Zero(m + p);
        a2.head(m) = a1;
        P1 = blk(P1, H.front());
        Pinf1 = blk(Pinf1, Matrix::Zero(p, p));
        a1 = std::move(a2);
        Z = std::move(z2);
        T = std::move(t2);
        R = std::move(r2);
        Q = std::move(q2);
        c = std::move(c2);
        H.assign(1, Matrix::Zero(p, p));
        m += p;
        r += p;
        augmented = true;
    }
    const std::size_t n = std::max(R.size(), Q.size());
    RQR.clear();
    for (std::size_t t = 0; t < n; ++t) {
        const Matrix& rr = at(R, static_cast<Eigen::Index>(t));
        Matrix v = rr * at(Q, static_cast<Eigen::Index>(t)) * rr.transpose();
        RQR.push_back(0.5 * (v + v.transpose()));
    }
}

System realize(const StateSpaceModel& model) {
    require_valid(model);
    System s;
    s.p = model.p();
    s.m = model.m();
    s.r = model.r();
    s.m_model = s.m;
    s.r_model = s.r;
    s.Z = sequence(model.Z);
    s.H = sequence(model.H);
    s.T = sequence(model.T);
    s.R = sequence(model.R);
    s.Q = sequence(model.Q);
    for (const auto& cc : sequence(model.c)) s.c.push_back(cc.col(0));
    s.a1 = model.a1.mat().col(0);
    split_diffuse(model.P1.mat(), s.P1, s.Pinf1);
    s.finalize();
    return s;
}

} // namespace ssm
