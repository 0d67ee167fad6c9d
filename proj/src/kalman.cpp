#include "ssm/kalman.hpp"

#include <cmath>

namespace ssm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

} // namespace

Matrix observations(const TimeSeriesData& y) {
    Matrix out = y.values();
    for (Eigen::Index t = 0; t < y.n(); ++t)
        for (Eigen::Index i = 0; i < y.p(); ++i)
            if (y.is_missing(i, t)) out(i, t) = kNaN;
    return out;
}

void require_gaussian(const StateSpaceModel& model, const char* what) {
    if (!model.is_gaussian())
        throw ArgumentError(std::string(what) + ": model has non-Gaussian parts; build a Gaussian approximation first");
}

FilterResult kalman_filter(const Matrix& y, std::shared_ptr<const System> sysp, const FilterOptions& opts) {
    const System& sys = *sysp;
    if (y.rows() != sys.p)
        throw StructuralError("data has " + std::to_string(y.rows()) + " series but the model has p = " +
                              std::to_string(sys.p));
    for (Eigen::Index t = 0; t < y.cols(); ++t)
        for (Eigen::Index i = 0; i < y.rows(); ++i)
            if (std::isinf(y(i, t))) throw DataError("infinite observation at series " + std::to_string(i + 1) +
                                                     ", time " + std::to_string(t + 1));

    const Eigen::Index n = y.cols();
    const Eigen::Index m = sys.m;
    const Eigen::Index p = sys.p;
    const double tol = opts.diffuse_tol;

    FilterResult res;
    res.n = n;
    res.sys = sysp;
    res.a.resize(m, n + 1);
    res.P.reserve(static_cast<std::size_t>(n + 1));
    res.v = Matrix::Constant(p, n, kNaN);
    res.F.reserve(static_cast<std::size_t>(n));
    res.steps.resize(static_cast<std::size_t>(n));

    Vector a = sys.a1;
    Matrix P = sys.P1;
    Matrix Pinf = sys.Pinf1;
    bool diffuse = sys.has_diffuse();
    double wsum = 0.0;
    Eigen::Index nobs = 0;

    for (Eigen::Index t = 0; t < n; ++t) {
        res.a.col(t) = a;
        res.P.push_back(P);
        if (diffuse) res.Pinf.push_back(Pinf);

        const Matrix& Z = sys.Zt(t);
        const Matrix& H = sys.Ht(t);
        Matrix Ft = Z * P * Z.transpose() + H;
        symmetrize(Ft);
        res.F.push_back(std::move(Ft));
        for (Eigen::Index i = 0; i < p; ++i)
            if (!std::isnan(y(i, t))) res.v(i, t) = y(i, t) - Z.row(i).dot(a);

        auto& steps = res.steps[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < p; ++i) {
            if (std::isnan(y(i, t))) continue;
            const auto z = Z.row(i);
            const double s2 = H(i, i);
            ElementStep st;
            st.row = i;
            st.v = y(i, t) - z.dot(a);
            st.M = P * z.transpose();
            st.F = z.dot(st.M) + s2;
            if (diffuse) {
                Vector Minf = Pinf * z.transpose();
                const double Finf = z.dot(Minf);
                if (Finf > tol * (1.0 + std::abs(st.F))) {
                    const Vector K0 = Minf / Finf;
                    a += K0 * st.v;
                    P += K0 * K0.transpose() * st.F - K0 * st.M.transpose() - st.M * K0.transpose();
                    Pinf -= Minf * Minf.transpose() / Finf;
                    wsum += std::log(Finf);
                    ++nobs;
                    st.Finf = Finf;
                    st.Minf = std::move(Minf);
                    st.diffuse = true;
                    steps.push_back(std::move(st));
                    continue;
                }
            }
            const double scale = 1.0 + (P.size() ? P.diagonal().cwiseAbs().maxCoeff() : 0.0) + std::abs(s2);
            if (st.F <= 1e-12 * scale) {
                if (st.F < -1e-8 * scale)
                    throw NumericError("negative prediction error variance at time " + std::to_string(t + 1));
                st.skipped = true;
                steps.push_back(std::move(st));
                continue;
            }
            a += st.M * (st.v / st.F);
            P -= st.M * st.M.transpose() / st.F;
            wsum += std::log(st.F) + st.v * st.v / st.F;
            ++nobs;
            steps.push_back(std::move(st));
        }
        symmetrize(P);

        if (diffuse) {
            symmetrize(Pinf);
            if (Pinf.diagonal().maxCoeff() < tol) {
                Pinf.setZero();
                diffuse = false;
                res.d = t + 1;
            }
        }

        const Matrix& T = sys.Tt(t);
        a = sys.ct(t) + T * a;
        P = T * P * T.transpose() + sys.RQRt(t);
        symmetrize(P);
        if (diffuse) Pinf = T * Pinf * T.transpose();
        if (!a.allFinite() || !P.allFinite()) throw NumericError("filter diverged at time " + std::to_string(t + 1));
    }
    res.a.col(n) = a;
    res.P.push_back(P);
    if (diffuse) {
        res.d = n;
        res.diffuse_unresolved = sys.has_diffuse();
    }
    res.nobs = nobs;
    res.loglik = -0.5 * (static_cast<double>(nobs) * kLog2Pi + wsum);
    return res;
}

FilterResult kalman_filter(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    require_gaussian(model, "kalman filter");
    return kalman_filter(observations(y), std::make_shared<const System>(realize(model)), opts);
}

double loglik(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    return kalman_filter(y, model, opts).loglik;
}

Forecast forecast(const TimeSeriesData& y, const StateSpaceModel& model, Eigen::Index h, const FilterOptions& opts) {
    if (h < 0) throw ArgumentError("forecast horizon must be non-negative");
    const FilterResult f = kalman_filter(y.extended(h), model, opts);
    Forecast out;
    out.mean.resize(f.sys->p, h);
    for (Eigen::Index k = 0; k < h; ++k) {
        const Eigen::Index t = y.n() + k;
        out.mean.col(k) = f.sys->Zt(t) * f.a.col(t);
        out.var.push_back(f.F[static_cast<std::size_t>(t)]);
    }
    return out;
}

} // namespace ssm
