#include "ssm/catalog.hpp"

#include "ssm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace ssm {

namespace {

using Index = Eigen::Index;

BoolMatrix no_mask(Index r, Index c) { return BoolMatrix::Constant(r, c, false); }

/// Zero model with the given observation, state and disturbance sizes.
StateSpaceModel blank(Index p, Index m, Index r) {
    StateSpaceModel out;
    out.H = DynamicMatrix(Matrix::Zero(p, p));
    out.Z = DynamicMatrix(Matrix::Zero(p, m));
    out.T = DynamicMatrix(Matrix::Zero(m, m));
    out.R = DynamicMatrix(Matrix::Zero(m, r));
    out.Q = DynamicMatrix(Matrix::Zero(r, r));
    out.c = DynamicMatrix(Matrix::Zero(m, 1));
    out.a1 = DynamicMatrix(Matrix::Zero(m, 1));
    out.P1 = DynamicMatrix(Matrix::Zero(m, m));
    return out;
}

Matrix diffuse(Index m) {
    Matrix P = Matrix::Zero(m, m);
    P.diagonal().setConstant(kInf);
    return P;
}

/// Records the model as one component and applies its initial parameters.
StateSpaceModel finish(StateSpaceModel m, const std::string& name, const std::string& code, bool noise = false,
                       std::shared_ptr<const ArimaInfo> arima = nullptr) {
    Component c;
    c.name = name;
    c.code = code;
    c.state_count = m.m();
    c.dist_count = m.r();
    c.noise = noise;
    c.arima = std::move(arima);
    for (Index i = 0; i < m.w(); ++i) c.pmask.push_back(i);
    m.components = {c};
    for (auto& b : m.updates)
        if (b.pmask.empty())
            for (Index i = 0; i < m.w(); ++i) b.pmask.push_back(i);
    m.name = name;
    m.refresh();
    return m;
}

Index need(const std::optional<Index>& v, const std::string& code, const char* what) {
    if (!v) throw ArgumentError("catalog: " + code + " requires argument '" + what + "'");
    return *v;
}

Index need_nonneg(const std::optional<Index>& v, const std::string& code, const char* what) {
    const Index x = need(v, code, what);
    if (x < 0) throw ArgumentError("catalog: " + code + " argument '" + what + "' must be non-negative");
    return x;
}

bool flag(const std::optional<BoolVector>& cov, std::size_t i, bool dflt = true) {
    if (!cov || cov->empty()) return dflt;
    return i < cov->size() ? (*cov)[i] : cov->back();
}

/// A variance block: k x k, correlated or diagonal, one parameter group named after `base`.
struct VarianceBlock {
    BoolMatrix mask;
    std::function<Vector(const Vector&)> cells;  // group values -> masked cells
};

VarianceBlock add_variance(ParamSet& params, const std::string& base, Index k, bool cov) {
    VarianceBlock out;
    if (k == 1 || !cov) {
        std::vector<std::string> names;
        if (k == 1) names.push_back(base + " var");
        else
            for (Index i = 0; i < k; ++i) names.push_back(base + " var " + std::to_string(i + 1));
        params.add_group(names, Transform::half_log());
        out.mask = no_mask(k, k);
        for (Index i = 0; i < k; ++i) out.mask(i, i) = true;
        out.cells = [](const Vector& v) { return v; };
        return out;
    }
    std::vector<std::string> names;
    for (Index i = 0; i < k; ++i) names.push_back(base + " var " + std::to_string(i + 1));
    for (Index j = 0; j < k; ++j)
        for (Index i = j + 1; i < k; ++i) names.push_back(base + " cov " + std::to_string(i + 1) + "," + std::to_string(j + 1));
    params.add_group(names, Transform::cov());
    out.mask = BoolMatrix::Constant(k, k, true);
    out.cells = [](const Vector& v) {
        const Matrix C = cov_from_values(v);
        return Vector(Eigen::Map<const Vector>(C.data(), C.size()));
    };
    return out;
}

/// Update binding writing one element from parameter range [begin, begin + count).
UpdateBinding bind(Element e, Index begin, Index count, std::function<Vector(const Vector&)> cells) {
    UpdateBinding b;
    b.adj.set(e);
    for (Index i = 0; i < count; ++i) b.pmask.push_back(begin + i);
    b.fn = [e, cells = std::move(cells)](const Vector& v) {
        UpdateOutput o;
        o.set(e, cells(v));
        return o;
    };
    return b;
}

// ---------------------------------------------------------------- noise

StateSpaceModel gaussian_noise(Index p, bool cov) {
    if (p < 1) throw ArgumentError("catalog: gaussian noise needs p >= 1");
    StateSpaceModel m = blank(p, 0, 0);
    const VarianceBlock vb = add_variance(m.params, "epsilon", p, cov);
    m.H = DynamicMatrix(Matrix::Zero(p, p), vb.mask);
    m.updates.push_back(bind(Element::H, 0, m.params.size(), vb.cells));
    return finish(std::move(m), "Gaussian noise", "gaussian", true);
}

StateSpaceModel fixed_noise(double var) {
    StateSpaceModel m = blank(1, 0, 0);
    m.H = DynamicMatrix(Matrix::Constant(1, 1, var));
    return finish(std::move(m), "irregular", "gaussian", true);
}

StateSpaceModel null_noise(Index p) {
    if (p < 1) throw ArgumentError("catalog: null noise needs p >= 1");
    return finish(blank(p, 0, 0), "null noise", "null", true);
}

StateSpaceModel expfamily_noise(const std::string& code, const CatalogArgs& a) {
    DistributionArgs da;
    da.k = a.k;
    if ((code == "binomial" || code == "negbinomial" || code == "multinomial") && a.k.size() == 0)
        throw ArgumentError("catalog: " + code + " requires argument 'k'");
    if (code == "multinomial") da.h = need(a.h, code, "h");
    if (code == "expfamily") {
        if (!a.b || !a.d2b || !a.id2bdb || !a.c)
            throw ArgumentError("catalog: expfamily requires functions b, d2b, id2bdb and c");
        da.b = a.b;
        da.d2b = a.d2b;
        da.id2bdb = a.id2bdb;
        da.c = a.c;
    }
    DistributionPtr dist = make_distribution(code, da);
    const Index p = dist->dim();
    StateSpaceModel m = blank(p, 0, 0);
    NonGaussianSpec spec;
    spec.dist = dist;
    for (Index i = 0; i < p; ++i) spec.rows.push_back(i);
    m.Hng.push_back(std::move(spec));
    static const std::map<std::string, std::string> names = {
        {"poisson", "Poisson error"},         {"binary", "binary error"}, {"binomial", "binomial error"},
        {"negbinomial", "negative binomial error"}, {"exp", "exponential error"},
        {"multinomial", "multinomial error"}, {"expfamily", "exponential family error"}};
    return finish(std::move(m), names.at(code), code, true);
}

StateSpaceModel t_noise(const std::optional<double>& nu) {
    if (nu && !(*nu > 2.0)) throw DomainError("catalog: t noise needs nu > 2");
    StateSpaceModel m = blank(1, 0, 0);
    m.params.add_group({"epsilon var"}, Transform::half_log());
    if (!nu) m.params.add_group({"nu"}, Transform::df(), Vector::Constant(1, 4.0));
    m.H = DynamicMatrix(Matrix::Ones(1, 1), BoolMatrix::Constant(1, 1, true));
    NonGaussianSpec spec;
    spec.dist = std::make_shared<StudentT>(1.0, nu.value_or(4.0));
    spec.rows = {0};
    spec.variable = true;
    m.Hng.push_back(std::move(spec));
    UpdateBinding b;
    b.adj = AdjacencyRow{Element::H, Element::Hng};
    const double fixed_nu = nu.value_or(0.0);
    b.fn = [fixed_nu](const Vector& v) {
        UpdateOutput o;
        o.set(Element::H, Vector(Vector::Constant(1, v(0))));
        const double df = v.size() > 1 ? v(1) : fixed_nu;
        o.set_ng(Element::Hng, {std::make_shared<StudentT>(v(0), df)});
        return o;
    };
    m.updates.push_back(std::move(b));
    return finish(std::move(m), "t-distribution noise", "t", true);
}

// ---------------------------------------------------------------- structural

std::vector<std::string> trend_names(Index count) {
    std::vector<std::string> out;
    for (Index i = 0; i < count; ++i)
        out.push_back(i == 0 ? "zeta var" : i == 1 ? "xi var" : "xi" + std::to_string(i) + " var");
    return out;
}

/// Local polynomial trend of order d; only the highest derivative is disturbed when integrated.
StateSpaceModel poly_trend(Index d, bool integrated) {
    if (d < 0) throw ArgumentError("catalog: trend order must be non-negative");
    const Index m = d + 1;
    const Index r = integrated ? 1 : m;
    StateSpaceModel out = blank(1, m, r);
    Matrix Z = Matrix::Zero(1, m);
    Z(0, 0) = 1.0;
    Matrix T = Matrix::Identity(m, m);
    for (Index i = 0; i + 1 < m; ++i) T(i, i + 1) = 1.0;
    Matrix R = Matrix::Zero(m, r);
    if (integrated) R(m - 1, 0) = 1.0;
    else R.setIdentity();
    out.Z = DynamicMatrix(Z);
    out.T = DynamicMatrix(T);
    out.R = DynamicMatrix(R);
    out.P1 = DynamicMatrix(diffuse(m));
    if (integrated) out.params.add_group({"zeta var"}, Transform::half_log());
    else out.params.add_group(trend_names(m), Transform::half_log());
    BoolMatrix mask = no_mask(r, r);
    mask.diagonal().setConstant(true);
    out.Q = DynamicMatrix(Matrix::Zero(r, r), mask);
    out.updates.push_back(bind(Element::Q, 0, r, [](const Vector& v) { return v; }));
    StateSpaceModel built = finish(std::move(out), integrated ? "integrated random walk" : "local polynomial trend",
                                   integrated ? "irw" : "lpt");
    return built;
}

StateSpaceModel seasonal(const std::string& type, Index s) {
    const SeasonalBlock blk = seasonal_block(type, s);
    const Index m = blk.T.rows(), r = blk.R.cols();
    StateSpaceModel out = blank(1, m, r);
    out.Z = DynamicMatrix(blk.Z);
    out.T = DynamicMatrix(blk.T);
    out.R = DynamicMatrix(blk.R);
    out.P1 = DynamicMatrix(diffuse(m));
    if (r > 0) {
        if (type == "h&s") {
            out.params.add_group({"omega var"}, Transform::half_log());
            const Matrix W = Matrix::Identity(r, r) - Matrix::Constant(r, r, 1.0 / static_cast<double>(s));
            out.Q = DynamicMatrix(Matrix::Zero(r, r), BoolMatrix::Constant(r, r, true));
            out.updates.push_back(bind(Element::Q, 0, 1, [W](const Vector& v) {
                const Matrix q = v(0) * W;
                return Vector(Eigen::Map<const Vector>(q.data(), q.size()));
            }));
        } else if (type == "trig2") {
            // one variance per harmonic, shared by its pair of states
            std::vector<Index> harmonic;
            for (Index j = 1; 2 * j <= s; ++j) {
                harmonic.push_back(j - 1);
                if (2 * j < s) harmonic.push_back(j - 1);
            }
            const Index nh = harmonic.back() + 1;
            std::vector<std::string> names;
            for (Index j = 0; j < nh; ++j) names.push_back("omega var " + std::to_string(j + 1));
            out.params.add_group(names, Transform::half_log());
            BoolMatrix mask = no_mask(r, r);
            mask.diagonal().setConstant(true);
            out.Q = DynamicMatrix(Matrix::Zero(r, r), mask);
            out.updates.push_back(bind(Element::Q, 0, nh, [harmonic](const Vector& v) {
                Vector q(static_cast<Index>(harmonic.size()));
                for (std::size_t i = 0; i < harmonic.size(); ++i) q(static_cast<Index>(i)) = v(harmonic[i]);
                return q;
            }));
        } else {
            out.params.add_group({"omega var"}, Transform::half_log());
            BoolMatrix mask = no_mask(r, r);
            mask.diagonal().setConstant(true);
            out.Q = DynamicMatrix(Matrix::Zero(r, r), mask);
            out.updates.push_back(bind(Element::Q, 0, 1, [r](const Vector& v) { return Vector::Constant(r, v(0)); }));
        }
    }
    return finish(std::move(out), "seasonal", "seasonal");
}

Matrix rotation(double rho, double lambda) {
    return rho * Matrix{{std::cos(lambda), std::sin(lambda)}, {-std::sin(lambda), std::cos(lambda)}};
}

/// Cycle for p variables sharing damping and frequency; disturbance covariance across variables.
StateSpaceModel cycle(Index p, bool cov) {
    const Index m = 2 * p;
    StateSpaceModel out = blank(p, m, m);
    Matrix Z = Matrix::Zero(p, m);
    for (Index i = 0; i < p; ++i) Z(i, 2 * i) = 1.0;
    out.Z = DynamicMatrix(Z);
    out.R = DynamicMatrix(Matrix::Identity(m, m));
    const VarianceBlock vb = add_variance(out.params, "cycle", p, cov);
    const Index nv = out.params.size();
    out.params.add_group({"cycle damping"}, Transform::logistic(1.0));
    out.params.add_group({"cycle frequency"}, Transform::logistic(std::numbers::pi));

    BoolMatrix tmask = no_mask(m, m);
    for (Index i = 0; i < p; ++i) tmask.block(2 * i, 2 * i, 2, 2).setConstant(true);
    out.T = DynamicMatrix(Matrix::Zero(m, m), tmask);
    // Q and P1 are kron(Sigma, I2) in variable-major order: every cell may be nonzero when correlated
    BoolMatrix qmask = no_mask(m, m);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            if (vb.mask(i, j)) qmask.block(2 * i, 2 * j, 2, 2).diagonal().setConstant(true);
    out.Q = DynamicMatrix(Matrix::Zero(m, m), qmask);
    out.P1 = DynamicMatrix(Matrix::Zero(m, m), qmask);

    UpdateBinding b;
    b.adj = AdjacencyRow{Element::T, Element::Q, Element::P1};
    b.fn = [p, m, nv, vb, tmask, qmask](const Vector& v) {
        const Vector cells = vb.cells(v.head(nv));
        Matrix S = Matrix::Zero(p, p);
        Index k = 0;
        for (Index j = 0; j < p; ++j)
            for (Index i = 0; i < p; ++i)
                if (vb.mask(i, j)) S(i, j) = cells(k++);
        const double rho = v(nv), lambda = v(nv + 1);
        Matrix T = Matrix::Zero(m, m), Qm = Matrix::Zero(m, m);
        for (Index i = 0; i < p; ++i) {
            T.block(2 * i, 2 * i, 2, 2) = rotation(rho, lambda);
            for (Index j = 0; j < p; ++j) Qm.block(2 * i, 2 * j, 2, 2) = S(i, j) * Matrix::Identity(2, 2);
        }
        auto pick = [](const Matrix& M, const BoolMatrix& mask) {
            const auto cellsv = masked_cells(mask);
            Vector out(static_cast<Index>(cellsv.size()));
            for (std::size_t c = 0; c < cellsv.size(); ++c) out(static_cast<Index>(c)) = M(cellsv[c].first, cellsv[c].second);
            return out;
        };
        UpdateOutput o;
        o.set(Element::T, pick(T, tmask));
        o.set(Element::Q, pick(Qm, qmask));
        o.set(Element::P1, pick(Qm / (1.0 - rho * rho), qmask));
        return o;
    };
    out.updates.push_back(std::move(b));
    return finish(std::move(out), "cycle", p == 1 ? "cycle" : "mvcycle");
}

/// Regression on the rows of x (k x n), coefficients as diffuse states; `rows_of[j]` is the observation row of state j.
StateSpaceModel regression(Index p, const Matrix& x, const std::vector<std::pair<Index, Index>>& loads, bool dynamic,
                           const std::vector<std::string>& names, const std::string& comp, const std::string& code) {
    const auto m = static_cast<Index>(loads.size());
    const Index n = x.cols();
    if (n < 1) throw ArgumentError("catalog: " + code + " needs at least one time point of regressors");
    StateSpaceModel out = blank(p, m, dynamic ? m : 0);
    BoolMatrix dmask = no_mask(p, m);
    for (Index j = 0; j < m; ++j) dmask(loads[static_cast<std::size_t>(j)].first, j) = true;
    // dvec rows follow the column-major order of the dynamic cells: one per state
    Matrix dvec(m, n);
    for (Index j = 0; j < m; ++j) dvec.row(j) = x.row(loads[static_cast<std::size_t>(j)].second);
    out.Z = DynamicMatrix(Matrix::Zero(p, m), no_mask(p, m), dmask, dvec);
    out.T = DynamicMatrix(Matrix::Identity(m, m));
    out.P1 = DynamicMatrix(diffuse(m));
    if (dynamic) {
        out.R = DynamicMatrix(Matrix::Identity(m, m));
        std::vector<std::string> pn;
        for (Index j = 0; j < m; ++j) pn.push_back(names[static_cast<std::size_t>(loads[static_cast<std::size_t>(j)].second)] + " var");
        out.params.add_group(pn, Transform::half_log());
        BoolMatrix mask = no_mask(m, m);
        mask.diagonal().setConstant(true);
        out.Q = DynamicMatrix(Matrix::Zero(m, m), mask);
        out.updates.push_back(bind(Element::Q, 0, m, [](const Vector& v) { return v; }));
    }
    return finish(std::move(out), comp, code);
}

std::vector<std::string> regressor_names(const CatalogArgs& a, Index k) {
    if (!a.names.empty()) {
        if (static_cast<Index>(a.names.size()) != k)
            throw ArgumentError("catalog: " + std::to_string(a.names.size()) + " regressor names for " + std::to_string(k) +
                                " regressors");
        return a.names;
    }
    std::vector<std::string> out;
    for (Index i = 0; i < k; ++i) out.push_back(k == 1 ? "x" : "x" + std::to_string(i + 1));
    return out;
}

StateSpaceModel univariate_reg(const CatalogArgs& a, bool dynamic) {
    const std::string code = dynamic ? "dynreg" : "reg";
    if (a.x.size() == 0) throw ArgumentError("catalog: " + code + " requires argument 'x'");
    std::vector<std::pair<Index, Index>> loads;
    for (Index j = 0; j < a.x.rows(); ++j) loads.emplace_back(0, j);
    return regression(1, a.x, loads, dynamic, regressor_names(a, a.x.rows()),
                      dynamic ? "dynamic regression" : "regression", code);
}

StateSpaceModel intervention(Index p, Index n, const std::vector<std::string>& types, const std::vector<Index>& tau,
                             const std::string& code) {
    if (static_cast<Index>(types.size()) != p) throw ArgumentError("catalog: " + code + " needs one type per variable");
    if (tau.empty()) throw ArgumentError("catalog: " + code + " requires argument 'tau'");
    Matrix x(p, n);
    std::vector<std::pair<Index, Index>> loads;
    for (Index i = 0; i < p; ++i) {
        const Index ti = static_cast<Index>(tau.size()) > i ? tau[static_cast<std::size_t>(i)] : tau.back();
        x.row(i) = intv_variable(n, types[static_cast<std::size_t>(i)], ti);
        loads.emplace_back(i, i);
    }
    std::vector<std::string> names(static_cast<std::size_t>(p), "intervention");
    return regression(p, x, loads, false, names, "intervention", code);
}

StateSpaceModel constant() {
    StateSpaceModel out = blank(1, 1, 0);
    out.Z = DynamicMatrix(Matrix::Ones(1, 1));
    out.T = DynamicMatrix(Matrix::Ones(1, 1));
    out.P1 = DynamicMatrix(diffuse(1));
    return finish(std::move(out), "constant", "constant");
}

/// p-variate level (order 0) or level and slope (order 1) with variable-major states.
StateSpaceModel mv_trend(Index p, Index order, const std::optional<BoolVector>& cov) {
    const Index m = p * (order + 1);
    StateSpaceModel out = blank(p, m, m);
    Matrix Z = Matrix::Zero(p, m);
    Z.leftCols(p).setIdentity();
    Matrix T = Matrix::Identity(m, m);
    if (order == 1) T.topRightCorner(p, p).setIdentity();
    out.Z = DynamicMatrix(Z);
    out.T = DynamicMatrix(T);
    out.R = DynamicMatrix(Matrix::Identity(m, m));
    out.P1 = DynamicMatrix(diffuse(m));
    const VarianceBlock lv = add_variance(out.params, "zeta", p, flag(cov, 1));
    const Index nl = out.params.size();
    VarianceBlock sv;
    if (order == 1) sv = add_variance(out.params, "xi", p, flag(cov, 2));
    BoolMatrix mask = no_mask(m, m);
    mask.topLeftCorner(p, p) = lv.mask;
    if (order == 1) mask.bottomRightCorner(p, p) = sv.mask;
    out.Q = DynamicMatrix(Matrix::Zero(m, m), mask);
    const Index w = out.params.size();
    out.updates.push_back(bind(Element::Q, 0, w, [lv, sv, nl, order](const Vector& v) {
        if (order == 0) return lv.cells(v);
        const Vector a = lv.cells(v.head(nl)), b = sv.cells(v.tail(v.size() - nl));
        Vector out(a.size() + b.size());
        out << a, b;
        return out;
    }));
    return finish(std::move(out), order == 0 ? "multivariate local level" : "multivariate local level trend",
                  order == 0 ? "mvllm" : "mvllt");
}

/// Univariate seasonal block replicated for p variables; disturbances correlated across variables.
StateSpaceModel mv_seasonal(Index p, const std::optional<BoolVector>& cov, const std::string& type, Index s) {
    const SeasonalBlock blk = seasonal_block(type, s);
    const Index mu = blk.T.rows();
    const bool fixed = (cov && cov->empty()) || blk.R.cols() == 0;
    // the fixed types already have no disturbance; [] as covariance removes it for the others
    const Index ru = fixed ? 0 : blk.R.cols();
    const Index m = p * mu, r = p * ru;
    StateSpaceModel out = blank(p, m, r);
    Matrix Z = Matrix::Zero(p, m), T = Matrix::Zero(m, m), R = Matrix::Zero(m, r);
    for (Index i = 0; i < p; ++i) {
        Z.block(i, i * mu, 1, mu) = blk.Z;
        T.block(i * mu, i * mu, mu, mu) = blk.T;
        if (ru > 0) R.block(i * mu, i * ru, mu, ru) = blk.R;
    }
    out.Z = DynamicMatrix(Z);
    out.T = DynamicMatrix(T);
    out.R = DynamicMatrix(R);
    out.P1 = DynamicMatrix(diffuse(m));
    if (r > 0) {
        const VarianceBlock vb = add_variance(out.params, "omega", p, flag(cov, 0));
        Matrix W = Matrix::Identity(ru, ru);
        if (type == "h&s") W -= Matrix::Constant(ru, ru, 1.0 / static_cast<double>(s));
        BoolMatrix mask = no_mask(r, r);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                if (vb.mask(i, j)) mask.block(i * ru, j * ru, ru, ru) = (W.array() != 0.0);
        out.Q = DynamicMatrix(Matrix::Zero(r, r), mask);
        const Index w = out.params.size();
        out.updates.push_back(bind(Element::Q, 0, w, [p, ru, r, vb, W, mask](const Vector& v) {
            const Vector cells = vb.cells(v);
            Matrix S = Matrix::Zero(p, p);
            Index k = 0;
            for (Index j = 0; j < p; ++j)
                for (Index i = 0; i < p; ++i)
                    if (vb.mask(i, j)) S(i, j) = cells(k++);
            Matrix Qm = Matrix::Zero(r, r);
            for (Index i = 0; i < p; ++i)
                for (Index j = 0; j < p; ++j) Qm.block(i * ru, j * ru, ru, ru) = S(i, j) * W;
            const auto mc = masked_cells(mask);
            Vector out(static_cast<Index>(mc.size()));
            for (std::size_t c = 0; c < mc.size(); ++c) out(static_cast<Index>(c)) = Qm(mc[c].first, mc[c].second);
            return out;
        }));
    }
    return finish(std::move(out), "seasonal", "mvseasonal");
}

StateSpaceModel common_levels(Index p, const Matrix& A, const Vector& a) {
    const Index r = A.cols();
    if (r < 1 || r > p || A.rows() != p - r)
        throw ArgumentError("catalog: commonlvls needs A* of size (p - r) x r with 1 <= r <= p");
    if (a.size() != p - r) throw ArgumentError("catalog: commonlvls needs a* of length p - r");
    StateSpaceModel out = blank(p, r + 1, r);
    Matrix Z = Matrix::Zero(p, r + 1);
    Z.topLeftCorner(r, r).setIdentity();
    Z.block(r, 0, p - r, r) = A;
    Z.block(r, r, p - r, 1) = a;
    out.Z = DynamicMatrix(Z);
    out.T = DynamicMatrix(Matrix::Identity(r + 1, r + 1));
    Matrix R = Matrix::Zero(r + 1, r);
    R.topRows(r).setIdentity();
    out.R = DynamicMatrix(R);
    // the last state is the constant 1 carrying a*
    Matrix a1 = Matrix::Zero(r + 1, 1);
    a1(r, 0) = 1.0;
    out.a1 = DynamicMatrix(a1);
    Matrix P1 = Matrix::Zero(r + 1, r + 1);
    P1.topLeftCorner(r, r) = diffuse(r);
    out.P1 = DynamicMatrix(P1);
    const VarianceBlock vb = add_variance(out.params, "zeta", r, true);
    out.Q = DynamicMatrix(Matrix::Zero(r, r), vb.mask);
    out.updates.push_back(bind(Element::Q, 0, out.params.size(), vb.cells));
    return combine_additive({gaussian_noise(p, true), finish(std::move(out), "common levels", "commonlvls")});
}

// ---------------------------------------------------------------- ARIMA type

/// Homogeneous-solution lags of a differencing operator carried as states
/// l_j = y_{t-j} / g, followed by a stationary ARMA block and an optional mean.
struct ArimaLayout {
    Vector delta;       // differencing polynomial, leading 1
    Index K = 0;        // lag states
    Index m0 = 1;       // ARMA block states
    bool mean = false;
    double g = 1.0;
    [[nodiscard]] Index m() const { return K + m0 + (mean ? 1 : 0); }
};

ArimaLayout layout(const Vector& delta, Index ar_deg, Index ma_deg, bool mean, double g = 1.0) {
    ArimaLayout L;
    L.delta = delta;
    L.K = delta.size() - 1;
    L.m0 = std::max(ar_deg, ma_deg + 1);
    L.mean = mean;
    L.g = g;
    return L;
}

StateSpaceModel arima_skeleton(const ArimaLayout& L) {
    const Index m = L.m();
    StateSpaceModel out = blank(1, m, 1);
    Matrix Z = Matrix::Zero(1, m);
    for (Index j = 0; j < L.K; ++j) Z(0, j) = -L.delta(j + 1) * L.g;
    Z(0, L.K) = 1.0;
    if (L.mean) Z(0, m - 1) = 1.0;
    Matrix T = Matrix::Zero(m, m);
    if (L.K > 0) {
        T.row(0) = Z.row(0) / L.g;
        for (Index j = 1; j < L.K; ++j) T(j, j - 1) = 1.0;
    }
    for (Index i = 0; i + 1 < L.m0; ++i) T(L.K + i, L.K + i + 1) = 1.0;
    if (L.mean) T(m - 1, m - 1) = 1.0;
    Matrix R = Matrix::Zero(m, 1);
    R(L.K, 0) = 1.0;
    Matrix P1 = Matrix::Zero(m, m);
    P1.topLeftCorner(L.K, L.K) = diffuse(L.K);
    if (L.mean) P1(m - 1, m - 1) = kInf;
    out.Z = DynamicMatrix(Z);
    out.T = DynamicMatrix(T);
    out.R = DynamicMatrix(R);
    out.P1 = DynamicMatrix(P1);
    return out;
}

void fill_arma(const ArimaLayout& L, const Vector& phi, const Vector& theta, Matrix& T, Matrix& R) {
    for (Index i = 1; i < phi.size(); ++i) T(L.K + i - 1, L.K) = -phi(i);
    for (Index i = 1; i < theta.size(); ++i) R(L.K + i, 0) = theta(i);
}

Matrix arma_stationary_var(const ArimaLayout& L, const Vector& phi, const Vector& theta, double var) {
    Matrix T = Matrix::Zero(L.m0, L.m0);
    for (Index i = 0; i + 1 < L.m0; ++i) T(i, i + 1) = 1.0;
    Matrix R = Matrix::Zero(L.m0, 1);
    R(0, 0) = 1.0;
    for (Index i = 1; i < phi.size(); ++i) T(i - 1, 0) = -phi(i);
    for (Index i = 1; i < theta.size(); ++i) R(i, 0) = theta(i);
    return lyapunov(T, var * R * R.transpose());
}

Vector ar_poly(const Vector& coef) {
    Vector out(coef.size() + 1);
    out(0) = 1.0;
    out.tail(coef.size()) = -coef;
    return out;
}

Vector ma_poly(const Vector& coef) {
    Vector out(coef.size() + 1);
    out(0) = 1.0;
    out.tail(coef.size()) = coef;
    return out;
}

std::vector<std::string> numbered(const std::string& base, Index k) {
    std::vector<std::string> out;
    for (Index i = 0; i < k; ++i) out.push_back(base + " " + std::to_string(i + 1));
    return out;
}

/// Multiplicative seasonal ARMA driven by a differencing operator, with estimated coefficients.
StateSpaceModel arima_family(Index p, Index q, Index P, Index Q, Index s, const Vector& delta, bool mean,
                             std::shared_ptr<ArimaInfo> info, const std::string& name, const std::string& code) {
    if (p < 0 || q < 0 || P < 0 || Q < 0) throw ArgumentError("catalog: " + code + " orders must be non-negative");
    if (s < 1) throw ArgumentError("catalog: " + code + " period must be positive");
    const Index ar_deg = p + s * P, ma_deg = q + s * Q;
    const ArimaLayout L = layout(delta, ar_deg, ma_deg, mean);
    StateSpaceModel out = arima_skeleton(L);
    const Index m = L.m();

    out.params.add_group(numbered("AR", p), Transform::ar());
    out.params.add_group(numbered("SAR", P), Transform::ar());
    out.params.add_group(numbered("MA", q), Transform::ma());
    out.params.add_group(numbered("SMA", Q), Transform::ma());
    out.params.add_group({"disturbance var"}, Transform::half_log());

    BoolMatrix tmask = no_mask(m, m), rmask = no_mask(m, 1), pmask = no_mask(m, m);
    for (Index i = 0; i < ar_deg; ++i) tmask(L.K + i, L.K) = true;
    for (Index i = 1; i <= ma_deg; ++i) rmask(L.K + i, 0) = true;
    pmask.block(L.K, L.K, L.m0, L.m0).setConstant(true);
    out.T = DynamicMatrix(out.T.mat(), tmask);
    out.R = DynamicMatrix(out.R.mat(), rmask);
    out.Q = DynamicMatrix(Matrix::Ones(1, 1), BoolMatrix::Constant(1, 1, true));
    out.P1 = DynamicMatrix(out.P1.mat(), pmask);

    auto polys = [p, q, P, Q, s](const Vector& v, Vector& phi, Vector& theta, double& var) {
        Index k = 0;
        const Vector ar = v.segment(k, p);
        k += p;
        const Vector sar = v.segment(k, P);
        k += P;
        const Vector ma = v.segment(k, q);
        k += q;
        const Vector sma = v.segment(k, Q);
        k += Q;
        phi = poly_mul(ar_poly(ar), spread_poly(ar_poly(sar), static_cast<int>(s)));
        theta = poly_mul(ma_poly(ma), spread_poly(ma_poly(sma), static_cast<int>(s)));
        var = v(k);
    };
    info->polys = polys;

    UpdateBinding b;
    if (ar_deg > 0) b.adj.set(Element::T);
    if (ma_deg > 0) b.adj.set(Element::R);
    b.adj.set(Element::Q);
    b.adj.set(Element::P1);
    b.fn = [L, ar_deg, ma_deg, polys](const Vector& v) {
        Vector phi, theta;
        double var = 0.0;
        polys(v, phi, theta, var);
        UpdateOutput o;
        if (ar_deg > 0) o.set(Element::T, Vector(-phi.tail(ar_deg)));
        if (ma_deg > 0) o.set(Element::R, Vector(theta.tail(ma_deg)));
        o.set(Element::Q, Vector(Vector::Constant(1, var)));
        const Matrix P = arma_stationary_var(L, phi, theta, var);
        o.set(Element::P1, Vector(Eigen::Map<const Vector>(P.data(), P.size())));
        return o;
    };
    out.updates.push_back(std::move(b));
    return finish(std::move(out), name, code, false, std::move(info));
}

/// Fixed-coefficient ARIMA block used by the components model.
StateSpaceModel arima_fixed(const Vector& delta, const Vector& phi, const Vector& theta, double var, double g,
                            const std::string& name) {
    if (var < 0.0 || !std::isfinite(var)) throw DomainError("catalog: component '" + name + "' variance must be >= 0");
    const ArimaLayout L = layout(delta, phi.size() - 1, theta.size() - 1, false, g);
    StateSpaceModel out = arima_skeleton(L);
    Matrix T = out.T.mat(), R = out.R.mat(), P1 = out.P1.mat();
    fill_arma(L, phi, theta, T, R);
    P1.block(L.K, L.K, L.m0, L.m0) = arma_stationary_var(L, phi, theta, var);
    out.T = DynamicMatrix(T);
    out.R = DynamicMatrix(R);
    out.Q = DynamicMatrix(Matrix::Constant(1, 1, var));
    out.P1 = DynamicMatrix(P1);
    return finish(std::move(out), name, "arimacom");
}

/// |det| of the map from diffuse initial states to the first K noiseless observations.
double diffuse_volume(const StateSpaceModel& model) {
    const Matrix P1 = model.P1.mat();
    std::vector<Index> idx;
    for (Index i = 0; i < P1.rows(); ++i)
        if (std::isinf(P1(i, i))) idx.push_back(i);
    const auto K = static_cast<Index>(idx.size());
    if (K == 0) return 1.0;
    Matrix M(K, K);
    for (Index j = 0; j < K; ++j) {
        Vector a = Vector::Zero(model.m());
        a(idx[static_cast<std::size_t>(j)]) = 1.0;
        for (Index t = 0; t < K; ++t) {
            M(t, j) = (model.Z.at(t) * a)(0);
            a = model.T.at(t) * a;
        }
    }
    return std::abs(M.determinant());
}

StateSpaceModel arima_components_model(const CatalogArgs& a) {
    const Index d = need_nonneg(a.d, "arimacom", "d"), D = need_nonneg(a.D, "arimacom", "D");
    const Index s = a.s.value_or(1);
    if (D > 0 && s < 2) throw ArgumentError("catalog: arimacom needs s >= 2 with seasonal differencing");
    const auto comps = arima_components(static_cast<int>(d + D), static_cast<int>(D), static_cast<int>(s), a.phi);
    const std::size_t nc = comps.size();
    if (a.theta.size() != nc && a.theta.size() != nc + 1)
        throw ArgumentError("catalog: arimacom needs " + std::to_string(nc) + " or " + std::to_string(nc + 1) +
                            " MA polynomials, got " + std::to_string(a.theta.size()));
    if (static_cast<std::size_t>(a.ksivar.size()) != a.theta.size() + 1)
        throw ArgumentError("catalog: arimacom needs one variance per component plus the irregular");

    Vector full = Vector::Ones(1);
    for (const auto& c : comps) full = poly_mul(full, c.diff);

    auto build = [&](double g) {
        std::vector<StateSpaceModel> parts{fixed_noise(a.ksivar(a.ksivar.size() - 1))};
        bool scaled = false;
        for (std::size_t k = 0; k < a.theta.size(); ++k) {
            const bool extra = k >= nc;
            const Vector diff = extra ? Vector::Ones(1) : comps[k].diff;
            const Vector phi = extra ? Vector::Ones(1) : comps[k].phi;
            double gk = 1.0;
            if (!scaled && diff.size() > 1) {
                gk = g;
                scaled = true;
            }
            parts.push_back(arima_fixed(diff, phi, a.theta[k], a.ksivar(static_cast<Index>(k)), gk,
                                        extra ? "extra MA" : comps[k].name));
        }
        return combine_additive(parts);
    };
    StateSpaceModel model = build(1.0);
    // Scale the first lag block so the diffuse volume matches the single lag form of the full operator.
    Index K1 = 0;
    for (const auto& c : comps)
        if (c.diff.size() > 1) {
            K1 = c.diff.size() - 1;
            break;
        }
    if (K1 > 0 && comps.size() > 1) {
        const double ref = diffuse_volume(arima_skeleton(layout(full, 0, 0, false)));
        const double cur = diffuse_volume(model);
        if (!(cur > 0.0)) throw NumericError("catalog: arimacom components share a unit root");
        model = build(std::pow(ref / cur, 1.0 / static_cast<double>(K1)));
    }
    model.name = "ARIMA components";
    return model;
}

// ---------------------------------------------------------------- spline

StateSpaceModel spline(const Vector& delta) {
    if (delta.size() == 0) throw ArgumentError("catalog: spline requires argument 'delta'");
    if ((delta.array() <= 0.0).any() || !delta.allFinite()) throw DomainError("catalog: spline step lengths must be positive");
    const Index n = delta.size();
    StateSpaceModel out = blank(1, 2, 2);
    out.Z = DynamicMatrix(Matrix{{1.0, 0.0}});
    BoolMatrix tdyn = no_mask(2, 2);
    tdyn(0, 1) = true;
    if (n == 1) out.T = DynamicMatrix(Matrix{{1.0, delta(0)}, {0.0, 1.0}});
    else out.T = DynamicMatrix(Matrix{{1.0, 0.0}, {0.0, 1.0}}, no_mask(2, 2), tdyn, Matrix(delta.transpose()));
    out.R = DynamicMatrix(Matrix::Identity(2, 2));
    out.P1 = DynamicMatrix(diffuse(2));
    out.params.add_group({"zeta var"}, Transform::half_log());
    // Q_t = sigma2 [[d^3/3, d^2/2], [d^2/2, d]]
    Matrix shape(4, n);
    for (Index t = 0; t < n; ++t) {
        const double dt = delta(t);
        shape.col(t) << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    }
    UpdateBinding b;
    if (n == 1) {
        out.Q = DynamicMatrix(Matrix::Zero(2, 2), BoolMatrix::Constant(2, 2, true));
        b.adj.set(Element::Q);
    } else {
        out.Q = DynamicMatrix(Matrix::Zero(2, 2), no_mask(2, 2), BoolMatrix::Constant(2, 2, true), Matrix::Zero(4, n),
                              BoolVector(4, true));
        b.adj.set(Element::Qd);
    }
    const bool dyn = n > 1;
    b.fn = [shape, dyn](const Vector& v) {
        UpdateOutput o;
        if (dyn) o.set(Element::Qd, Matrix(v(0) * shape));
        else o.set(Element::Q, Vector(v(0) * shape.col(0)));
        return o;
    };
    out.updates.push_back(std::move(b));
    return combine_additive({gaussian_noise(1, true), finish(std::move(out), "cubic spline", "spline")});
}

// ---------------------------------------------------------------- dispatch

const std::vector<std::string> kSeasonalTypes = {"dummy", "dummy fixed", "h&s", "trig1", "trig2", "trig fixed"};

std::string seasonal_type(const CatalogArgs& a, const std::string& code) {
    if (a.type.empty()) throw ArgumentError("catalog: " + code + " requires argument 'type'");
    return a.type;
}

Index seasonal_period(const CatalogArgs& a, const std::string& code) {
    const Index s = need(a.s, code, "s");
    if (s < 2) throw ArgumentError("catalog: " + code + " period must be at least 2");
    return s;
}

StateSpaceModel level_part(const std::string& lvl, Index p, const std::optional<BoolVector>& cov) {
    if (lvl == "level") return p == 1 ? poly_trend(0, false) : mv_trend(p, 0, cov);
    if (lvl == "trend") return p == 1 ? poly_trend(1, false) : mv_trend(p, 1, cov);
    throw ArgumentError("catalog: level type must be 'level' or 'trend', got '" + lvl + "'");
}

StateSpaceModel mvreg(Index p, const CatalogArgs& a) {
    if (a.x.size() == 0) throw ArgumentError("catalog: mvreg requires argument 'x'");
    const Index k = a.x.rows();
    BoolMatrix dep = a.dep.size() == 0 ? BoolMatrix::Constant(p, k, true) : a.dep;
    if (dep.rows() != p || dep.cols() != k) throw ArgumentError("catalog: mvreg dependence must be p x k");
    std::vector<std::pair<Index, Index>> loads;
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < k; ++j)
            if (dep(i, j)) loads.emplace_back(i, j);
    return regression(p, a.x, loads, false, regressor_names(a, k), "regression", "mvreg");
}

} // namespace

const std::vector<std::string>& catalog_codes() {
    static const std::vector<std::string> codes = {
        "gaussian", "normal",   "null",     "poisson",    "binary",     "binomial", "negbinomial", "exp",
        "multinomial", "expfamily", "t",    "irw",        "lpt",        "llm",      "llt",         "seasonal",
        "cycle",    "reg",      "dynreg",   "intv",       "constant",   "stsm",     "commonlvls",  "mvllm",
        "mvllt",    "mvseasonal", "mvcycle", "mvreg",     "mvintv",     "mvstsm",   "arma",        "arima",
        "sarima",   "sumarma",  "airline",  "arimacom",   "spline"};
    return codes;
}

const std::vector<std::string>& out_of_scope_codes() {
    static const std::vector<std::string> codes = {"genair", "sarimahtd", "1/f noise", "td6", "td1", "lom",
                                                   "ly",     "ee",        "zmsv",      "mix", "error"};
    return codes;
}

RowVector intv_variable(Index n, const std::string& type, Index tau) {
    if (n < 1) throw ArgumentError("intervention length must be positive");
    if (tau < 1 || tau > n)
        throw ArgumentError("intervention onset " + std::to_string(tau) + " outside 1.." + std::to_string(n));
    RowVector x = RowVector::Zero(n);
    const Index t0 = tau - 1;
    if (type == "step") x.tail(n - t0).setOnes();
    else if (type == "pulse") x(t0) = 1.0;
    else if (type == "slope")
        for (Index t = t0; t < n; ++t) x(t) = static_cast<double>(t - t0 + 1);
    else if (type != "null") throw ArgumentError("unknown intervention type '" + type + "'");
    return x;
}

SeasonalBlock seasonal_block(const std::string& type, Index s) {
    if (s < 2) throw ArgumentError("seasonal period must be at least 2");
    const Index m = s - 1;
    SeasonalBlock b;
    b.Z = Matrix::Zero(1, m);
    b.T = Matrix::Zero(m, m);
    if (type == "dummy" || type == "dummy fixed" || type == "h&s") {
        b.Z(0, 0) = 1.0;
        if (type == "h&s") {
            // first s-1 of the s rotating effects; the last is minus their sum
            for (Index i = 0; i + 1 < m; ++i) b.T(i, i + 1) = 1.0;
            b.T.row(m - 1).setConstant(-1.0);
        } else {
            b.T.row(0).setConstant(-1.0);
            for (Index i = 1; i < m; ++i) b.T(i, i - 1) = 1.0;
        }
        b.R = type == "dummy fixed" ? Matrix::Zero(m, 0) : type == "h&s" ? Matrix(Matrix::Identity(m, m)) : Matrix(Matrix::Identity(m, 1));
        return b;
    }
    if (type == "trig1" || type == "trig2" || type == "trig fixed") {
        Index at = 0;
        for (Index j = 1; 2 * j <= s; ++j) {
            const double lambda = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(s);
            b.Z(0, at) = 1.0;
            if (2 * j == s) {
                b.T(at, at) = -1.0;
                ++at;
            } else {
                b.T.block(at, at, 2, 2) = rotation(1.0, lambda);
                at += 2;
            }
        }
        b.R = type == "trig fixed" ? Matrix::Zero(m, 0) : Matrix(Matrix::Identity(m, m));
        return b;
    }
    throw ArgumentError("unknown seasonal type '" + type + "'");
}

std::vector<ArimaComponent> arima_components(int trend_d, int D, int s, const std::vector<Vector>& phi) {
    if (trend_d < 0 || D < 0) throw ArgumentError("differencing orders must be non-negative");
    auto extra = [&](std::size_t k) { return k < phi.size() && phi[k].size() > 0 ? poly_trim(phi[k]) : Vector(Vector::Ones(1)); };
    for (const auto& f : phi)
        if (f.size() > 0 && f(0) != 1.0) throw ArgumentError("AR factors must have leading coefficient 1");
    std::vector<ArimaComponent> out;
    const Vector trend = diff_poly(trend_d);
    if (trend.size() > 1 || extra(0).size() > 1) out.push_back({"trend", trend, extra(0)});
    const Vector seas = D > 0 ? seasonal_sum_poly(s, D) : Vector(Vector::Ones(1));
    if (seas.size() > 1 || extra(1).size() > 1) out.push_back({"seasonal", seas, extra(1)});
    for (std::size_t k = 2; k < phi.size(); ++k)
        if (extra(k).size() > 1) out.push_back({"transitory " + std::to_string(k - 1), Vector::Ones(1), extra(k)});
    return out;
}

StateSpaceModel predefined(const std::string& code, const CatalogArgs& a) {
    for (const auto& oos : out_of_scope_codes())
        if (code == oos) throw OutOfScopeError("catalog: out of scope model '" + code + "'");

    if (code == "gaussian" || code == "normal") return gaussian_noise(a.p.value_or(1), flag(a.cov, 0));
    if (code == "null") return null_noise(a.p.value_or(1));
    if (code == "poisson" || code == "binary" || code == "binomial" || code == "negbinomial" || code == "exp" ||
        code == "multinomial" || code == "expfamily")
        return expfamily_noise(code, a);
    if (code == "t") return t_noise(a.nu);

    if (code == "irw") return poly_trend(need_nonneg(a.d, code, "d"), true);
    if (code == "lpt") return poly_trend(need_nonneg(a.d, code, "d"), false);
    if (code == "llm") {
        StateSpaceModel m = combine_additive({gaussian_noise(1, true), poly_trend(0, false)});
        m.name = "local level model";
        return m;
    }
    if (code == "llt") {
        StateSpaceModel m = combine_additive({gaussian_noise(1, true), poly_trend(1, false)});
        m.name = "local level trend";
        return m;
    }
    if (code == "seasonal") return seasonal(seasonal_type(a, code), seasonal_period(a, code));
    if (code == "cycle") return cycle(1, true);
    if (code == "reg") return univariate_reg(a, false);
    if (code == "dynreg") return univariate_reg(a, true);
    if (code == "intv") {
        if (a.type.empty()) throw ArgumentError("catalog: intv requires argument 'type'");
        return intervention(1, need(a.n, code, "n"), {a.type}, a.tau, code);
    }
    if (code == "constant") return constant();
    if (code == "stsm") {
        if (a.lvl.empty()) throw ArgumentError("catalog: stsm requires argument 'lvl'");
        std::vector<StateSpaceModel> parts{gaussian_noise(1, true), level_part(a.lvl, 1, {}),
                                           seasonal(seasonal_type(a, code), seasonal_period(a, code))};
        if (a.cycle.value_or(false)) parts.push_back(cycle(1, true));
        if (a.x.size() > 0) parts.push_back(univariate_reg(a, false));
        StateSpaceModel m = combine_additive(parts);
        m.name = "structural time series model";
        return m;
    }
    if (code == "commonlvls") return common_levels(need(a.p, code, "p"), a.A, a.a);
    if (code == "mvllm" || code == "mvllt") {
        const Index p = need(a.p, code, "p");
        if (p < 1) throw ArgumentError("catalog: " + code + " needs p >= 1");
        StateSpaceModel m = combine_additive({gaussian_noise(p, flag(a.cov, 0)), mv_trend(p, code == "mvllm" ? 0 : 1, a.cov)});
        m.name = code == "mvllm" ? "multivariate local level model" : "multivariate local level trend";
        return m;
    }
    if (code == "mvseasonal") {
        const Index p = need(a.p, code, "p");
        return mv_seasonal(p, a.cov, seasonal_type(a, code), seasonal_period(a, code));
    }
    if (code == "mvcycle") return cycle(need(a.p, code, "p"), flag(a.cov, 0));
    if (code == "mvreg") return mvreg(need(a.p, code, "p"), a);
    if (code == "mvintv") {
        const Index p = need(a.p, code, "p");
        std::vector<std::string> types = a.types;
        if (types.empty() && !a.type.empty()) types.assign(static_cast<std::size_t>(p), a.type);
        return intervention(p, need(a.n, code, "n"), types, a.tau, code);
    }
    if (code == "mvstsm") {
        const Index p = need(a.p, code, "p");
        if (a.lvl.empty()) throw ArgumentError("catalog: mvstsm requires argument 'lvl'");
        // cov flags in turn: noise, level, [slope], seasonal, [cycle]
        const BoolVector cov = a.cov.value_or(BoolVector{});
        std::size_t at = 0;
        auto next = [&]() { return at < cov.size() ? cov[at++] : (cov.empty() ? true : cov.back()); };
        const bool noise_cov = next();
        BoolVector lvl_cov{true, next()};
        if (a.lvl == "trend") lvl_cov.push_back(next());
        const bool seas_cov = next();
        std::vector<StateSpaceModel> parts{gaussian_noise(p, noise_cov), level_part(a.lvl, p, lvl_cov),
                                           mv_seasonal(p, BoolVector{seas_cov}, seasonal_type(a, code),
                                                       seasonal_period(a, code))};
        if (a.cycle.value_or(false)) parts.push_back(cycle(p, next()));
        if (a.x.size() > 0) parts.push_back(mvreg(p, a));
        StateSpaceModel m = combine_additive(parts);
        m.name = "multivariate structural time series model";
        return m;
    }

    if (code == "arma") {
        auto info = std::make_shared<ArimaInfo>();
        info->mean = a.mean.value_or(false);
        return arima_family(need(a.p, code, "p"), need(a.q, code, "q"), 0, 0, 1, Vector::Ones(1), info->mean, info,
                            "ARMA", code);
    }
    if (code == "arima") {
        auto info = std::make_shared<ArimaInfo>();
        const Index d = need_nonneg(a.d, code, "d");
        info->d = static_cast<int>(d);
        info->mean = a.mean.value_or(false);
        return arima_family(need(a.p, code, "p"), need(a.q, code, "q"), 0, 0, 1, diff_poly(static_cast<int>(d)),
                            info->mean, info, "ARIMA", code);
    }
    if (code == "sarima" || code == "airline") {
        const bool air = code == "airline";
        const Index s = air ? a.s.value_or(12) : need(a.s, code, "s");
        if (s < 1) throw ArgumentError("catalog: " + code + " period must be positive");
        const Index d = air ? 1 : need_nonneg(a.d, code, "d");
        const Index D = air ? 1 : need_nonneg(a.D, code, "D");
        auto info = std::make_shared<ArimaInfo>();
        info->d = static_cast<int>(d + D);
        info->D = static_cast<int>(D);
        info->s = static_cast<int>(s);
        info->mean = air ? false : a.mean.value_or(false);
        const Vector delta = poly_mul(diff_poly(static_cast<int>(d)), spread_poly(diff_poly(static_cast<int>(D)), static_cast<int>(s)));
        return arima_family(air ? 0 : need(a.p, code, "p"), air ? 1 : need(a.q, code, "q"), air ? 0 : need(a.P, code, "P"),
                            air ? 1 : need(a.Q, code, "Q"), s, delta, info->mean, info, air ? "airline" : "SARIMA", code);
    }
    if (code == "sumarma") {
        const Index s = need(a.s, code, "s");
        const Index D = need_nonneg(a.D, code, "D");
        if (s < 2) throw ArgumentError("catalog: sumarma period must be at least 2");
        auto info = std::make_shared<ArimaInfo>();
        info->D = static_cast<int>(D);
        info->s = static_cast<int>(s);
        info->mean = a.mean.value_or(false);
        return arima_family(need(a.p, code, "p"), need(a.q, code, "q"), 0, 0, 1,
                            seasonal_sum_poly(static_cast<int>(s), static_cast<int>(D)), info->mean, info,
                            "sum ARMA", code);
    }
    if (code == "arimacom") return arima_components_model(a);
    if (code == "spline") return spline(a.delta);

    throw ArgumentError("catalog: unknown model code '" + code + "'");
}

} // namespace ssm
