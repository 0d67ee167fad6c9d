#include "ssm/smoother.hpp"
#include "ssm/detail/parallel.hpp"

#include "ssm/random.hpp"

#include <cmath>
#include <exception>
#include <mutex>

namespace ssm {

namespace {

using StepValues = std::vector<std::vector<double>>;

struct Backward {
    Matrix alphahat, epshat, etahat, r;
    std::vector<Matrix> V, epsvar, etavar, N;
};

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

// L' x for L = I - k z
Vector lt_times(const Vector& x, const Vector& k, const RowVector& z) { return x - z.transpose() * k.dot(x); }

// L' A L for L = I - k z
Matrix lt_a_l(const Matrix& A, const Vector& k, const RowVector& z) {
    const Vector Ak = A * k;
    const Vector AtK = A.transpose() * k;
    const double kAk = k.dot(Ak);
    return A - Ak * z - z.transpose() * AtK.transpose() + z.transpose() * z * kAk;
}

Backward backward(const System& sys, const FilterResult& f, const Matrix& a, const StepValues& v, bool variances) {
    const Eigen::Index n = f.n;
    const Eigen::Index m = sys.m;
    const Eigen::Index p = sys.p;
    const Eigen::Index rdim = sys.r;
    const Eigen::Index d = f.d;

    Backward out;
    out.alphahat.resize(m, n);
    out.epshat = Matrix::Zero(p, n);
    out.etahat.resize(rdim, n);
    if (variances) {
        out.r.resize(m, n);
        out.V.resize(static_cast<std::size_t>(n));
        out.epsvar.resize(static_cast<std::size_t>(n));
        out.etavar.resize(static_cast<std::size_t>(n));
        out.N.resize(static_cast<std::size_t>(n));
    }

    Vector r0 = Vector::Zero(m), r1 = Vector::Zero(m);
    Matrix N0, N1, N2;
    if (variances) {
        N0 = Matrix::Zero(m, m);
        N1 = Matrix::Zero(m, m);
        N2 = Matrix::Zero(m, m);
    }

    struct Pending {
        Eigen::Index row;
        double s2;
        Vector g;
    };
    std::vector<Pending> pending;

    for (Eigen::Index t = n - 1; t >= 0; --t) {
        const auto ts = static_cast<std::size_t>(t);
        const Matrix& Q = sys.Qt(t);
        const Matrix QR = Q * sys.Rt(t).transpose();
        out.etahat.col(t) = QR * r0;
        if (variances) {
            Matrix ev = Q - QR * N0 * QR.transpose();
            symmetrize(ev);
            out.etavar[ts] = std::move(ev);
        }
        const Matrix& T = sys.Tt(t);
        const bool diff_t = t < d;
        r0 = T.transpose() * r0;
        if (diff_t) r1 = T.transpose() * r1;
        if (variances) {
            N0 = T.transpose() * N0 * T;
            if (diff_t) {
                N1 = T.transpose() * N1 * T;
                N2 = T.transpose() * N2 * T;
            }
        }

        const Matrix& Z = sys.Zt(t);
        const Matrix& H = sys.Ht(t);
        Matrix E;
        if (variances) {
            E = Matrix::Zero(p, p);
            E.diagonal() = H.diagonal();
        }
        pending.clear();

        const auto& steps = f.steps[ts];
        for (auto k = static_cast<Eigen::Index>(steps.size()) - 1; k >= 0; --k) {
            const ElementStep& st = steps[static_cast<std::size_t>(k)];
            if (st.skipped) {
                out.epshat(st.row, t) = 0.0;
                if (variances) E(st.row, st.row) = 0.0;
                continue;
            }
            const RowVector z = Z.row(st.row);
            const double s2 = H(st.row, st.row);
            const double vk = v[ts][static_cast<std::size_t>(k)];
            if (st.diffuse) {
                const Vector K0 = st.Minf / st.Finf;
                const Vector K1 = (st.M - K0 * st.F) / st.Finf;
                out.epshat(st.row, t) = -s2 * K0.dot(r0);
                if (variances) {
                    const Vector N0K0 = N0 * K0;
                    E(st.row, st.row) = s2 - s2 * s2 * K0.dot(N0K0);
                    for (auto& pj : pending) {
                        const double cv = s2 * pj.s2 * K0.dot(pj.g);
                        E(st.row, pj.row) = cv;
                        E(pj.row, st.row) = cv;
                        pj.g = lt_times(pj.g, K0, z);
                    }
                    pending.push_back({st.row, s2, -lt_times(N0K0, K0, z)});

                    // L1 = -K1 z
                    const Matrix L0 = Matrix::Identity(m, m) - K0 * z;
                    const Matrix L1 = -K1 * z;
                    const Matrix zz = z.transpose() * z;
                    Matrix n2 = -zz * (st.F / (st.Finf * st.Finf)) + L0.transpose() * N2 * L0 +
                                L0.transpose() * N1 * L1 + L1.transpose() * N1 * L0 + L1.transpose() * N0 * L1;
                    Matrix n1 = zz / st.Finf + L0.transpose() * N1 * L0 + L1.transpose() * N0 * L0 +
                                L0.transpose() * N0 * L1;
                    N0 = L0.transpose() * N0 * L0;
                    N1 = std::move(n1);
                    N2 = std::move(n2);
                    symmetrize(N0);
                    symmetrize(N1);
                    symmetrize(N2);
                }
                const Vector new_r1 = z.transpose() * (vk / st.Finf) + lt_times(r1, K0, z) - z.transpose() * K1.dot(r0);
                r0 = lt_times(r0, K0, z);
                r1 = new_r1;
            } else {
                const Vector K = st.M / st.F;
                out.epshat(st.row, t) = s2 * (vk - st.M.dot(r0)) / st.F;
                if (variances) {
                    const Vector N0K = N0 * K;
                    E(st.row, st.row) = s2 - s2 * s2 * (1.0 / st.F + K.dot(N0K));
                    for (auto& pj : pending) {
                        const double cv = s2 * pj.s2 * K.dot(pj.g);
                        E(st.row, pj.row) = cv;
                        E(pj.row, st.row) = cv;
                        pj.g = lt_times(pj.g, K, z);
                    }
                    pending.push_back({st.row, s2, z.transpose() / st.F - lt_times(N0K, K, z)});

                    N0 = z.transpose() * z / st.F + lt_a_l(N0, K, z);
                    symmetrize(N0);
                    if (diff_t) {
                        N1 = lt_a_l(N1, K, z);
                        N2 = lt_a_l(N2, K, z);
                    }
                }
                r0 = z.transpose() * (vk / st.F) + lt_times(r0, K, z);
                if (diff_t) r1 = lt_times(r1, K, z);
            }
        }

        const Matrix& P = f.P[ts];
        Vector ah = a.col(t) + P * r0;
        if (diff_t) ah += f.Pinf[ts] * r1;
        out.alphahat.col(t) = ah;
        if (variances) {
            Matrix Vt = P - P * N0 * P;
            if (diff_t) {
                const Matrix& Pi = f.Pinf[ts];
                const Matrix cross = Pi * N1 * P;
                Vt -= cross + cross.transpose() + Pi * N2 * Pi;
            }
            symmetrize(Vt);
            out.V[ts] = std::move(Vt);
            out.epsvar[ts] = std::move(E);
            out.r.col(t) = r0;
            out.N[ts] = N0;
        }
    }
    return out;
}

StepValues filter_values(const FilterResult& f) {
    StepValues v(f.steps.size());
    for (std::size_t t = 0; t < f.steps.size(); ++t)
        for (const auto& st : f.steps[t]) v[t].push_back(st.v);
    return v;
}

// Forward pass with stored gains: innovations and predicted means for new data.
Matrix rerun_forward(const Matrix& y, const FilterResult& f, StepValues& v) {
    const System& sys = *f.sys;
    if (y.rows() != sys.p || y.cols() != f.n) throw StructuralError("data set does not match the filtered dimensions");
    Matrix a(sys.m, f.n + 1);
    Vector at = sys.a1;
    v.assign(f.steps.size(), {});
    for (Eigen::Index t = 0; t < f.n; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        a.col(t) = at;
        const Matrix& Z = sys.Zt(t);
        Eigen::Index observed = 0;
        for (Eigen::Index i = 0; i < sys.p; ++i) observed += std::isnan(y(i, t)) ? 0 : 1;
        if (observed != static_cast<Eigen::Index>(f.steps[ts].size()))
            throw DataError("missing pattern differs from the filtered data at time " + std::to_string(t + 1));
        for (const auto& st : f.steps[ts]) {
            const double yi = y(st.row, t);
            if (std::isnan(yi))
                throw DataError("missing pattern differs from the filtered data at time " + std::to_string(t + 1));
            const double vi = yi - Z.row(st.row).dot(at);
            v[ts].push_back(vi);
            if (st.skipped) continue;
            if (st.diffuse)
                at += st.Minf * (vi / st.Finf);
            else
                at += st.M * (vi / st.F);
        }
        at = sys.ct(t) + sys.Tt(t) * at;
    }
    a.col(f.n) = at;
    return a;
}

// Maps results of an augmented system back to the model's state and noise.
void project(const System& sys, Matrix& alpha, Matrix& eps, Matrix& eta) {
    if (!sys.augmented) return;
    eps = alpha.bottomRows(sys.p).eval();
    alpha = alpha.topRows(sys.m_model).eval();
    eta = eta.topRows(sys.r_model).eval();
}

FastSmoothResult finish_fast(const System& sys, Backward&& b) {
    FastSmoothResult out{std::move(b.alphahat), std::move(b.epshat), std::move(b.etahat)};
    project(sys, out.alphahat, out.epshat, out.etahat);
    return out;
}

using detail::for_replicates;

Matrix psd_sqrt(const Matrix& A) {
    if (A.size() == 0) return A;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
}

struct SqrtFactors {
    Matrix P1;
    std::vector<Matrix> H, Q;
};

SqrtFactors factors(const System& sys, double diffuse_var) {
    SqrtFactors s;
    s.P1 = psd_sqrt(sys.P1 + diffuse_var * sys.Pinf1);
    for (const auto& h : sys.H) s.H.push_back(psd_sqrt(h));
    for (const auto& q : sys.Q) s.Q.push_back(psd_sqrt(q));
    return s;
}

struct Unconditional {
    Matrix y, alpha, eps, eta;
};

// One forward simulation from the normals in `u`, consumed in order.
Unconditional simulate(const System& sys, const SqrtFactors& sq, Eigen::Index n, const Vector& u) {
    Unconditional o;
    o.y.resize(sys.p, n);
    o.alpha.resize(sys.m, n);
    o.eps.resize(sys.p, n);
    o.eta.resize(sys.r, n);
    Eigen::Index pos = 0;
    auto take = [&](Eigen::Index k) {
        auto seg = u.segment(pos, k);
        pos += k;
        return seg;
    };
    Vector x = sys.a1 + sq.P1 * take(sys.m);
    for (Eigen::Index t = 0; t < n; ++t) {
        o.alpha.col(t) = x;
        o.eps.col(t) = System::at(sq.H, t) * take(sys.p);
        o.eta.col(t) = System::at(sq.Q, t) * take(sys.r);
        o.y.col(t) = sys.Zt(t) * x + o.eps.col(t);
        x = sys.ct(t) + sys.Tt(t) * x + sys.Rt(t) * o.eta.col(t);
    }
    return o;
}

Eigen::Index normals_needed(const System& sys, Eigen::Index n) { return sys.m + n * (sys.p + sys.r); }

} // namespace

SmoothResult smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    SmoothResult out;
    out.filter = kalman_filter(y, model, opts);
    const System& sys = *out.filter.sys;
    Backward b = backward(sys, out.filter, out.filter.a, filter_values(out.filter), true);
    if (sys.augmented) {
        const Eigen::Index m0 = sys.m_model;
        const Eigen::Index p = sys.p;
        for (std::size_t t = 0; t < b.V.size(); ++t) {
            b.epsvar[t] = b.V[t].bottomRightCorner(p, p);
            b.V[t] = b.V[t].topLeftCorner(m0, m0).eval();
            b.etavar[t] = b.etavar[t].topLeftCorner(sys.r_model, sys.r_model).eval();
            b.N[t] = b.N[t].topLeftCorner(m0, m0).eval();
        }
        b.r = b.r.topRows(m0).eval();
        project(sys, b.alphahat, b.epshat, b.etahat);
    }
    out.alphahat = std::move(b.alphahat);
    out.V = std::move(b.V);
    out.epshat = std::move(b.epshat);
    out.epsvar = std::move(b.epsvar);
    out.etahat = std::move(b.etahat);
    out.etavar = std::move(b.etavar);
    out.r = std::move(b.r);
    out.N = std::move(b.N);
    return out;
}

StateSmooth state_smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    SmoothResult s = smooth(y, model, opts);
    return {std::move(s.alphahat), std::move(s.V)};
}

DisturbanceSmooth disturb_smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    SmoothResult s = smooth(y, model, opts);
    return {std::move(s.epshat), std::move(s.epsvar), std::move(s.etahat), std::move(s.etavar)};
}

FastSmoothResult fast_smooth(const FilterResult& filter) {
    return finish_fast(*filter.sys, backward(*filter.sys, filter, filter.a, filter_values(filter), false));
}

FastSmoothResult fast_smooth_with_gains(const Matrix& y, const FilterResult& filter) {
    StepValues v;
    const Matrix a = rerun_forward(y, filter, v);
    return finish_fast(*filter.sys, backward(*filter.sys, filter, a, v, false));
}

FastSmoothResult fast_smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    const FilterResult f = kalman_filter(y, model, opts);
    return fast_smooth(f);
}

Matrix fast_state_smooth(const TimeSeriesData& y, const StateSpaceModel& model, const FilterOptions& opts) {
    return fast_smooth(y, model, opts).alphahat;
}

std::vector<FastSmoothResult> batch_smooth(const std::vector<Matrix>& ys, const StateSpaceModel& model, Execution exec,
                                           const FilterOptions& opts) {
    require_gaussian(model, "batch smoother");
    std::vector<FastSmoothResult> out(ys.size());
    if (ys.empty()) return out;
    const FilterResult f = kalman_filter(ys.front(), std::make_shared<const System>(realize(model)), opts);
    for_replicates(static_cast<Eigen::Index>(ys.size()), exec, [&](Eigen::Index j) {
        out[static_cast<std::size_t>(j)] = fast_smooth_with_gains(ys[static_cast<std::size_t>(j)], f);
    });
    return out;
}

Draws sim_smooth(const TimeSeriesData& y, const StateSpaceModel& model, Eigen::Index N, const SimOptions& opts) {
    require_gaussian(model, "simulation smoother");
    if (N < 1) throw ArgumentError("number of draws must be at least 1");
    const Matrix yobs = observations(y);
    const FilterResult f = kalman_filter(yobs, std::make_shared<const System>(realize(model)), opts.filter);
    const System& sys = *f.sys;
    // Diffuse initial elements are drawn at a1: the exact diffuse smoother is invariant to them.
    const SqrtFactors sq = factors(sys, 0.0);
    Backward mean = backward(sys, f, f.a, filter_values(f), false);

    const Eigen::Index n = y.n();
    Draws out;
    out.alpha.resize(static_cast<std::size_t>(N));
    out.eps.resize(static_cast<std::size_t>(N));
    out.eta.resize(static_cast<std::size_t>(N));
    for_replicates(N, opts.exec, [&](Eigen::Index j) {
        const std::uint64_t stream = opts.antithetic ? static_cast<std::uint64_t>(j / 2) : static_cast<std::uint64_t>(j);
        Vector u = standard_normals(opts.seed, stream, normals_needed(sys, n));
        if (opts.antithetic && (j % 2 == 1)) u = -u;
        Unconditional plus = simulate(sys, sq, n, u);
        for (Eigen::Index t = 0; t < n; ++t)
            for (Eigen::Index i = 0; i < sys.p; ++i)
                if (std::isnan(yobs(i, t))) plus.y(i, t) = kNaN;
        StepValues v;
        const Matrix a = rerun_forward(plus.y, f, v);
        Backward bp = backward(sys, f, a, v, false);
        Matrix alpha = mean.alphahat + plus.alpha - bp.alphahat;
        Matrix eps = mean.epshat + plus.eps - bp.epshat;
        Matrix eta = mean.etahat + plus.eta - bp.etahat;
        project(sys, alpha, eps, eta);
        const auto js = static_cast<std::size_t>(j);
        out.alpha[js] = std::move(alpha);
        out.eps[js] = std::move(eps);
        out.eta[js] = std::move(eta);
    });
    return out;
}

Samples sample(const StateSpaceModel& model, Eigen::Index n, Eigen::Index N, const SampleOptions& opts) {
    require_gaussian(model, "sample");
    if (n < 1) throw ArgumentError("sample length must be positive");
    if (N < 0) throw ArgumentError("number of samples must be non-negative");
    if (opts.diffuse_var < 0.0) throw ArgumentError("diffuse variance must be non-negative");
    const System sys = realize(model);
    const SqrtFactors sq = factors(sys, opts.diffuse_var);
    Samples out;
    out.y.resize(static_cast<std::size_t>(N));
    out.alpha.resize(static_cast<std::size_t>(N));
    out.eps.resize(static_cast<std::size_t>(N));
    out.eta.resize(static_cast<std::size_t>(N));
    for_replicates(N, opts.exec, [&](Eigen::Index j) {
        Unconditional o = simulate(sys, sq, n, standard_normals(opts.seed, static_cast<std::uint64_t>(j),
                                                                 normals_needed(sys, n)));
        project(sys, o.alpha, o.eps, o.eta);
        const auto js = static_cast<std::size_t>(j);
        out.y[js] = std::move(o.y);
        out.alpha[js] = std::move(o.alpha);
        out.eps[js] = std::move(o.eps);
        out.eta[js] = std::move(o.eta);
    });
    return out;
}

} // namespace ssm
