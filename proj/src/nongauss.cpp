#include "ssm/nongauss.hpp"

#include "ssm/detail/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>

namespace ssm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Vector gather(const Matrix& m, const std::vector<Eigen::Index>& rows, Eigen::Index t) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = m(rows[k], t);
    return out;
}

void scatter(Matrix& m, const std::vector<Eigen::Index>& rows, Eigen::Index t, const Vector& v) {
    for (std::size_t k = 0; k < rows.size(); ++k) m(rows[k], t) = v(static_cast<Eigen::Index>(k));
}

bool any_missing(const TimeSeriesData& y, const std::vector<Eigen::Index>& rows, Eigen::Index t) {
    for (Eigen::Index i : rows)
        if (y.is_missing(i, t)) return true;
    return false;
}

/// Copy of `base` over n time points with the (rows, rows) block of each spec
/// replaced by blocks[spec][t] and the spec rows' cross terms cleared.
DynamicMatrix with_blocks(const DynamicMatrix& base, Eigen::Index n, const std::vector<NonGaussianSpec>& specs,
                          const std::vector<std::vector<Matrix>>& blocks) {
    const Eigen::Index R = base.rows();
    BoolMatrix touched = BoolMatrix::Constant(R, R, false);
    Vector owned = Vector::Zero(R);
    for (const auto& s : specs)
        for (Eigen::Index i : s.rows) owned(i) = 1.0;
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index j = 0; j < R; ++j) touched(i, j) = owned(i) > 0.0 || owned(j) > 0.0;
    BoolMatrix dyn = touched;
    if (!base.is_stationary()) dyn = dyn || base.dmmask();

    Matrix mat = base.mat();
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index j = 0; j < R; ++j)
            if (touched(i, j)) mat(i, j) = 0.0;
    const auto cells = masked_cells(dyn);
    Matrix dvec(static_cast<Eigen::Index>(cells.size()), n);
    for (Eigen::Index t = 0; t < n; ++t) {
        Matrix v = base.at(t);
        for (Eigen::Index i = 0; i < R; ++i)
            for (Eigen::Index j = 0; j < R; ++j)
                if (touched(i, j)) v(i, j) = 0.0;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            const auto& rows = specs[s].rows;
            const Matrix& b = blocks[s][static_cast<std::size_t>(t)];
            for (std::size_t a = 0; a < rows.size(); ++a)
                for (std::size_t c = 0; c < rows.size(); ++c)
                    v(rows[a], rows[c]) = b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
        }
        for (std::size_t k = 0; k < cells.size(); ++k) dvec(static_cast<Eigen::Index>(k), t) = v(cells[k].first, cells[k].second);
    }
    if (cells.empty()) return DynamicMatrix(mat);
    return DynamicMatrix(mat, BoolMatrix::Constant(R, R, false), dyn, dvec);
}

const ExpFamily* as_exp(const NonGaussianSpec& s) {
    return s.dist->kind() == Distribution::Kind::ExpFamily ? static_cast<const ExpFamily*>(s.dist.get()) : nullptr;
}

const AdditiveNoise* as_additive(const NonGaussianSpec& s) {
    return s.dist->kind() == Distribution::Kind::AdditiveNoise ? static_cast<const AdditiveNoise*>(s.dist.get()) : nullptr;
}

/// Current linearisation point: the signal on non-Gaussian observation rows
/// (additive rows imply eps = y - signal) and the non-Gaussian state disturbances.
struct Point {
    Matrix signal;  // p x n
    Matrix eta;     // r x n
    bool nominal = false;
};

class Approximator {
public:
    Approximator(const TimeSeriesData& y, const StateSpaceModel& model, const ApproxOptions& opts)
        : y_(y), model_(model), opts_(opts), n_(y.n()) {
        Z_.reserve(static_cast<std::size_t>(n_));
        for (Eigen::Index t = 0; t < n_; ++t) Z_.push_back(model.Z.at(t));
    }

    Point start(const Matrix& alpha0) const {
        Point pt;
        pt.signal = Matrix::Zero(model_.p(), n_);
        pt.eta = Matrix::Zero(model_.r(), n_);
        if (alpha0.size() > 0) {
            if (alpha0.rows() != model_.m() || alpha0.cols() != n_)
                throw ArgumentError("initial state path must be " + std::to_string(model_.m()) + " x " + std::to_string(n_));
            for (Eigen::Index t = 0; t < n_; ++t) pt.signal.col(t) = Z_[static_cast<std::size_t>(t)] * alpha0.col(t);
            return pt;
        }
        pt.nominal = true;
        for (const auto& s : model_.Hng)
            if (const ExpFamily* e = as_exp(s))
                for (Eigen::Index t = 0; t < n_; ++t) {
                    Vector yy = gather(y_.values(), s.rows, t);
                    if (any_missing(y_, s.rows, t)) yy.setZero();
                    scatter(pt.signal, s.rows, t, e->start(yy, t));
                }
        return pt;
    }

    /// Approximating Gaussian model and pseudo-data at a point.
    std::pair<StateSpaceModel, TimeSeriesData> linearize(const Point& pt) const {
        Matrix ytilde = y_.values();
        std::vector<std::vector<Matrix>> hb(model_.Hng.size()), qb(model_.Qng.size());
        for (std::size_t k = 0; k < model_.Hng.size(); ++k) {
            const auto& s = model_.Hng[k];
            hb[k].resize(static_cast<std::size_t>(n_));
            for (Eigen::Index t = 0; t < n_; ++t) {
                const bool miss = any_missing(y_, s.rows, t);
                Matrix& h = hb[k][static_cast<std::size_t>(t)];
                const Vector theta = gather(pt.signal, s.rows, t);
                if (const ExpFamily* e = as_exp(s)) {
                    Vector yt;
                    const Vector yy = miss ? Vector::Zero(theta.size()) : gather(y_.values(), s.rows, t);
                    e->approximate(yy, theta, t, h, yt);
                    if (!miss) scatter(ytilde, s.rows, t, yt);
                } else {
                    const AdditiveNoise* a = as_additive(s);
                    h = (pt.nominal || miss) ? a->nominal_var() : a->approx_var(gather(y_.values(), s.rows, t) - theta);
                }
                if (!h.allFinite()) throw NumericError("approximating variance is not finite at time " + std::to_string(t + 1));
            }
        }
        for (std::size_t k = 0; k < model_.Qng.size(); ++k) {
            const auto& s = model_.Qng[k];
            const AdditiveNoise* a = as_additive(s);
            if (!a) throw StructuralError("state disturbance densities must be additive noise");
            qb[k].resize(static_cast<std::size_t>(n_));
            for (Eigen::Index t = 0; t < n_; ++t)
                qb[k][static_cast<std::size_t>(t)] = pt.nominal ? a->nominal_var() : a->approx_var(gather(pt.eta, s.rows, t));
        }
        StateSpaceModel g = model_;
        if (!model_.Hng.empty()) g.H = with_blocks(model_.H, n_, model_.Hng, hb);
        if (!model_.Qng.empty()) g.Q = with_blocks(model_.Q, n_, model_.Qng, qb);
        g.Hng.clear();
        g.Qng.clear();
        g.updates.clear();
        return {std::move(g), TimeSeriesData(ytilde, y_.missing())};
    }

    Point next(const FastSmoothResult& fs) const {
        Point pt;
        pt.signal = Matrix::Zero(model_.p(), n_);
        for (Eigen::Index t = 0; t < n_; ++t) pt.signal.col(t) = Z_[static_cast<std::size_t>(t)] * fs.alphahat.col(t);
        pt.eta = fs.etahat;
        return pt;
    }

    double change(const Point& a, const Point& b) const {
        double out = 0.0;
        for (const auto& s : model_.Hng)
            for (Eigen::Index i : s.rows) out = std::max(out, (a.signal.row(i) - b.signal.row(i)).cwiseAbs().maxCoeff());
        for (const auto& s : model_.Qng)
            for (Eigen::Index i : s.rows) out = std::max(out, (a.eta.row(i) - b.eta.row(i)).cwiseAbs().maxCoeff());
        return out;
    }

    /// log p(y | signal) + log g(signal): the objective whose mode is sought.
    /// Only defined without state disturbance densities.
    [[nodiscard]] bool has_objective() const { return model_.Qng.empty(); }

    /// log p(y | signal) alone; -inf where the signal leaves the density's domain.
    double data_logp(const Point& pt) const {
        double lp = 0.0;
        try {
            for (const auto& s : model_.Hng)
                for (Eigen::Index t = 0; t < n_; ++t) {
                    if (any_missing(y_, s.rows, t)) continue;
                    const Vector theta = gather(pt.signal, s.rows, t);
                    const Vector yy = gather(y_.values(), s.rows, t);
                    if (const ExpFamily* e = as_exp(s))
                        lp += e->logp(yy, theta, t) + (e->d2b(theta, t).allFinite() ? 0.0 : kNaN);
                    else
                        lp += as_additive(s)->logp(yy - theta);
                }
        } catch (const DomainError&) {
            return -std::numeric_limits<double>::infinity();
        }
        return std::isnan(lp) ? -std::numeric_limits<double>::infinity() : lp;
    }

    double objective(const Point& pt) const {
        const double dl = data_logp(pt);
        if (!std::isfinite(dl)) return dl;
        Matrix data = y_.values();
        for (const auto& s : model_.Hng)
            for (Eigen::Index t = 0; t < n_; ++t)
                if (!any_missing(y_, s.rows, t)) scatter(data, s.rows, t, gather(pt.signal, s.rows, t));
        std::vector<std::vector<Matrix>> zero(model_.Hng.size());
        for (std::size_t k = 0; k < zero.size(); ++k) {
            const auto d = static_cast<Eigen::Index>(model_.Hng[k].rows.size());
            zero[k].assign(static_cast<std::size_t>(n_), Matrix::Zero(d, d));
        }
        StateSpaceModel g = model_;
        g.H = with_blocks(model_.H, n_, model_.Hng, zero);
        g.Hng.clear();
        g.updates.clear();
        return dl + loglik(TimeSeriesData(data, y_.missing()), g, opts_.filter);
    }

    static Point blend(const Point& from, const Point& to, double w) {
        Point out = to;
        out.signal = from.signal + w * (to.signal - from.signal);
        out.eta = from.eta + w * (to.eta - from.eta);
        return out;
    }

private:
    const TimeSeriesData& y_;
    const StateSpaceModel& model_;
    const ApproxOptions& opts_;
    Eigen::Index n_;
    std::vector<Matrix> Z_;
};

double log_normal(const Vector& x, const Eigen::LLT<Matrix>& llt) {
    const Matrix& L = llt.matrixL();
    const Vector z = llt.matrixL().solve(x);
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + z.squaredNorm()) - L.diagonal().array().log().sum();
}

} // namespace

GaussApproximation gauss_approximate(const TimeSeriesData& y, const StateSpaceModel& model, const Matrix& alpha0,
                                     const ApproxOptions& opts) {
    if (model.is_gaussian()) return {model, y, fast_state_smooth(y, model, opts.filter), 0, true};
    require_valid(model);
    if (y.p() != model.p())
        throw StructuralError("data has " + std::to_string(y.p()) + " rows, model expects " + std::to_string(model.p()));
    if (opts.maxiter < 1) throw ArgumentError("maxiter must be at least 1");

    const Approximator ap(y, model, opts);
    Point cur = ap.start(alpha0);
    bool on_support = alpha0.size() > 0;
    double jcur = on_support && ap.has_objective() ? ap.objective(cur) : 0.0;
    GaussApproximation out;
    for (int it = 1; it <= opts.maxiter; ++it) {
        auto [g, yt] = ap.linearize(cur);
        Point nxt = ap.next(fast_smooth(yt, g, opts.filter));
        if (on_support && ap.has_objective()) {
            double jn = ap.objective(nxt);
            // step halving while the penalised log density goes down
            for (int h = 0; h < 30 && !(jn >= jcur - 1e-10 * (1.0 + std::abs(jcur))); ++h) {
                nxt = Approximator::blend(cur, nxt, 0.5);
                jn = ap.objective(nxt);
            }
            jcur = jn;
        } else {
            // first step from an arbitrary start: only keep the signal inside the domain
            for (int h = 0; h < 30 && !std::isfinite(ap.data_logp(nxt)); ++h) nxt = Approximator::blend(cur, nxt, 0.5);
            if (ap.has_objective()) jcur = ap.objective(nxt);
        }
        const double delta = cur.nominal ? std::numeric_limits<double>::infinity() : ap.change(cur, nxt);
        cur = std::move(nxt);
        on_support = true;
        out.iterations = it;
        if (delta < opts.tol) break;
        if (it == opts.maxiter) {
            auto [gl, ytl] = ap.linearize(cur);
            GaussApproximation last{gl, ytl, fast_state_smooth(ytl, gl, opts.filter), it, false};
            throw ApproximationError("Gaussian approximation did not converge in " + std::to_string(it) + " iterations",
                                     std::move(last));
        }
    }
    auto [g, yt] = ap.linearize(cur);
    out.alphahat = fast_state_smooth(yt, g, opts.filter);
    out.model = std::move(g);
    out.ytilde = std::move(yt);
    out.converged = true;
    return out;
}

Vector log_weights(const StateSpaceModel& model, const GaussApproximation& approx, const TimeSeriesData& y,
                   const Draws& draws, Execution exec) {
    const auto N = static_cast<Eigen::Index>(draws.alpha.size());
    Vector w = Vector::Zero(N);
    if (model.is_gaussian() || N == 0) return w;
    const Eigen::Index n = y.n();

    struct Term {
        const NonGaussianSpec* spec;
        bool state;
        std::vector<Eigen::LLT<Matrix>> llt;  // approximating variance block per time
    };
    std::vector<Term> terms;
    auto add = [&](const NonGaussianSpec& s, bool state) {
        Term term{&s, state, {}};
        for (Eigen::Index t = 0; t < n; ++t) {
            const Matrix full = state ? approx.model.Q.at(t) : approx.model.H.at(t);
            Matrix b(static_cast<Eigen::Index>(s.rows.size()), static_cast<Eigen::Index>(s.rows.size()));
            for (std::size_t a = 0; a < s.rows.size(); ++a)
                for (std::size_t c = 0; c < s.rows.size(); ++c)
                    b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = full(s.rows[a], s.rows[c]);
            term.llt.emplace_back(b);
            if (term.llt.back().info() != Eigen::Success)
                throw NumericError("approximating variance is not positive definite at time " + std::to_string(t + 1));
        }
        terms.push_back(std::move(term));
    };
    for (const auto& s : model.Hng) add(s, false);
    for (const auto& s : model.Qng) add(s, true);
    std::vector<Matrix> Z;
    for (Eigen::Index t = 0; t < n; ++t) Z.push_back(model.Z.at(t));

    detail::for_replicates(N, exec, [&](Eigen::Index i) {
        const auto is = static_cast<std::size_t>(i);
        double sum = 0.0;
        for (const auto& term : terms) {
            const auto& rows = term.spec->rows;
            for (Eigen::Index t = 0; t < n; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                if (term.state) {
                    const Vector e = gather(draws.eta[is], rows, t);
                    sum += as_additive(*term.spec)->logp(e) - log_normal(e, term.llt[ts]);
                    continue;
                }
                if (any_missing(y, rows, t)) continue;
                if (const ExpFamily* ef = as_exp(*term.spec)) {
                    const Vector theta = gather(Z[ts] * draws.alpha[is].col(t), rows, 0);
                    const Vector yy = gather(y.values(), rows, t);
                    const Vector yt = gather(approx.ytilde.values(), rows, t);
                    sum += ef->logp(yy, theta, t) - log_normal(yt - theta, term.llt[ts]);
                } else {
                    const Vector e = gather(draws.eps[is], rows, t);
                    sum += as_additive(*term.spec)->logp(e) - log_normal(e, term.llt[ts]);
                }
            }
        }
        w(i) = sum;
    });
    return w;
}

double logprobrat(const StateSpaceModel& model, const GaussApproximation& approx, const TimeSeriesData& y,
                  const Draws& draws, Execution exec) {
    if (draws.alpha.empty()) throw ArgumentError("at least one importance draw is needed");
    const Vector w = log_weights(model, approx, y, draws, exec);
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (!std::isnan(w(i))) mx = std::max(mx, w(i));
    if (!std::isfinite(mx)) throw NumericError("all importance weights are zero or undefined");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (!std::isnan(w(i))) acc += std::exp(w(i) - mx);
    return mx + std::log(acc) - std::log(static_cast<double>(w.size()));
}

NonGaussianLoglik importance_loglik(const TimeSeriesData& y, const StateSpaceModel& model,
                                    const GaussApproximation& approx, const ImportanceOptions& opts) {
    NonGaussianLoglik out;
    out.gaussian = loglik(approx.ytilde, approx.model);
    if (!model.is_gaussian() && opts.nsamp > 0) {
        SimOptions so;
        so.antithetic = opts.antithetic;
        so.seed = opts.seed;
        so.exec = opts.exec;
        const Draws d = sim_smooth(approx.ytilde, approx.model, opts.nsamp, so);
        out.correction = logprobrat(model, approx, y, d, opts.exec);
    }
    out.loglik = out.gaussian + out.correction;
    return out;
}

} // namespace ssm
