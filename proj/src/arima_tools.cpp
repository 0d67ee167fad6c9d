#include "ssm/arima_tools.hpp"

#include "ssm/catalog.hpp"
#include "ssm/detail/parallel.hpp"
#include "ssm/kalman.hpp"
#include "ssm/linalg.hpp"
#include "ssm/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace ssm {

using cplx = std::complex<double>;
using Index = Eigen::Index;

ArimaSpec ArimaSpec::airline(int s) {
    ArimaSpec a;
    a.d = 1;
    a.q = 1;
    a.D = 1;
    a.Q = 1;
    a.s = s;
    return a;
}

std::string ArimaSpec::str() const {
    std::string out = "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
    if (s > 1 && (P || D || Q)) out += "(" + std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")" + std::to_string(s);
    if (mean) out += " with mean";
    return out;
}

StateSpaceModel arima_model(const ArimaSpec& spec) {
    if (spec.p < 0 || spec.d < 0 || spec.q < 0 || spec.P < 0 || spec.D < 0 || spec.Q < 0)
        throw ArgumentError("ARIMA orders must be non-negative");
    CatalogArgs a;
    a.p = spec.p;
    a.q = spec.q;
    a.mean = spec.mean;
    if (spec.P || spec.D || spec.Q) {
        if (spec.s < 2) throw ArgumentError("seasonal orders need a period of at least 2");
        a.d = spec.d;
        a.P = spec.P;
        a.D = spec.D;
        a.Q = spec.Q;
        a.s = spec.s;
        return predefined("sarima", a);
    }
    if (spec.d > 0) {
        a.d = spec.d;
        return predefined("arima", a);
    }
    return predefined("arma", a);
}

// ---------------------------------------------------------------- polynomials in x = cos w

namespace {

double xeval(const Vector& c, double x) {
    double v = 0.0;
    for (Index i = c.size() - 1; i >= 0; --i) v = v * x + c(i);
    return v;
}

Vector xderiv(const Vector& c) {
    if (c.size() <= 1) return Vector::Zero(1);
    Vector out(c.size() - 1);
    for (Index i = 1; i < c.size(); ++i) out(i - 1) = static_cast<double>(i) * c(i);
    return out;
}

Vector xsub(const Vector& a, const Vector& b) {
    Vector out = Vector::Zero(std::max(a.size(), b.size()));
    out.head(a.size()) += a;
    out.head(b.size()) -= b;
    return out;
}

/// Quotient of c by (x - r).
Vector deflate(const Vector& c, double r) {
    const Index n = c.size() - 1;
    if (n < 1) return Vector::Zero(1);
    Vector q(n);
    double acc = c(n);
    for (Index i = n - 1; i >= 0; --i) {
        q(i) = acc;
        acc = c(i) + r * acc;
    }
    return q;
}

/// |P(e^{iw})|^2 as a polynomial in cos w.
Vector cos_poly(const Vector& P) {
    const Index n = P.size() - 1;
    if (n < 0) return Vector::Zero(1);
    // Chebyshev polynomials T_0..T_n in the monomial basis
    std::vector<Vector> T(static_cast<std::size_t>(n + 1), Vector::Zero(n + 1));
    T[0](0) = 1.0;
    if (n >= 1) T[1](1) = 1.0;
    for (Index j = 2; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        T[js] = -T[js - 2];
        for (Index i = 0; i < n; ++i) T[js](i + 1) += 2.0 * T[js - 1](i);
    }
    Vector out = Vector::Zero(n + 1);
    for (Index j = 0; j <= n; ++j) {
        double r = 0.0;
        for (Index i = 0; i + j <= n; ++i) r += P(i) * P(i + j);
        out += (j == 0 ? 1.0 : 2.0) * r * T[static_cast<std::size_t>(j)];
    }
    return out;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vector trimmed(const Vector& c) {
    const double tol = 1e-13 * max_abs(c);
    Index n = c.size();
    while (n > 1 && std::abs(c(n - 1)) <= tol) --n;
    return c.head(n);
}

struct Minimum {
    double x = 1.0;
    double value = 0.0;
    /// 2 for an interior minimum (double root of N - m D), 1 at an end point.
    int multiplicity = 1;
};

/// Minimum over x in [-1, 1] of N(x) / D(x), away from the zeros of D.
Minimum ratio_minimum(const Vector& N, const Vector& D) {
    const int G = 4096;
    auto g = [&](double x) {
        const double den = xeval(D, x);
        return den > 0.0 ? xeval(N, x) / den : kInf;
    };
    // stationary points of N/D are the roots of N' D - N D'
    const Vector h = xsub(poly_mul(xderiv(N), D), poly_mul(N, xderiv(D)));
    auto hx = [&](double x) { return xeval(h, x); };

    int best = 0;
    double bv = kInf;
    std::vector<double> xs(G + 1);
    for (int j = 0; j <= G; ++j) {
        xs[static_cast<std::size_t>(j)] = std::cos(std::numbers::pi * j / G);
        const double v = g(xs[static_cast<std::size_t>(j)]);
        if (v < bv) {
            bv = v;
            best = j;
        }
    }
    if (!std::isfinite(bv)) throw NumericError("htd: component spectrum has no finite value");
    auto refine = [&](double lo, double hi) -> std::optional<double> {
        double flo = hx(lo), fhi = hx(hi);
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = hx(mid);
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    Minimum out;
    std::optional<double> xr;
    // x decreases as the grid index grows
    const double lo = xs[static_cast<std::size_t>(std::min(best + 1, G))];
    const double hi = xs[static_cast<std::size_t>(std::max(best - 1, 0))];
    if (best > 0 && best < G) {
        xr = refine(lo, xs[static_cast<std::size_t>(best)]);
        if (!xr) xr = refine(xs[static_cast<std::size_t>(best)], hi);
    } else if (best == 0) {
        xr = refine(lo, 1.0);
    } else {
        xr = refine(-1.0, hi);
    }
    if (xr && *xr > -1.0 && *xr < 1.0 && g(*xr) <= bv) {
        out.x = *xr;
        out.multiplicity = 2;
    } else {
        out.x = xs[static_cast<std::size_t>(best)];
        out.multiplicity = (best == 0 || best == G) ? 1 : 2;
    }
    out.value = g(out.x);
    return out;
}

/// sigma |theta(e^{iw})|^2 = p(cos w) with theta invertible; `known` is a root of p already located.
std::pair<Vector, double> spectral_factor(const Vector& p_in, const std::optional<Minimum>& known) {
    Vector p = trimmed(p_in);
    if (max_abs(p) == 0.0) return {Vector::Ones(1), 0.0};
    std::vector<cplx> z;
    Vector rest = p;
    if (known && rest.size() > 1) {
        const double x = known->x;
        if (known->multiplicity == 2 && rest.size() > 2) {
            rest = deflate(deflate(rest, x), x);
            const double w = std::acos(std::clamp(x, -1.0, 1.0));
            z.push_back(std::polar(1.0, w));
            z.push_back(std::polar(1.0, -w));
        } else {
            rest = deflate(rest, x);
            z.push_back(x > 0.0 ? cplx(1.0) : cplx(-1.0));
        }
    }
    std::vector<double> circle;
    for (const cplx& x : poly_roots(trimmed(rest))) {
        if (std::abs(x.imag()) <= 1e-9 && std::abs(x.real()) <= 1.0) {
            circle.push_back(x.real());
            continue;
        }
        const cplx w = std::sqrt(x * x - 1.0);
        const cplx a = x + w, b = x - w;
        z.push_back(std::abs(a) >= std::abs(b) ? a : b);
    }
    std::sort(circle.begin(), circle.end());
    for (std::size_t i = 0; i + 1 < circle.size(); i += 2) {
        const double w = std::acos(std::clamp(0.5 * (circle[i] + circle[i + 1]), -1.0, 1.0));
        z.push_back(std::polar(1.0, w));
        z.push_back(std::polar(1.0, -w));
    }
    if (circle.size() % 2) z.push_back(circle.back() > 0.0 ? cplx(1.0) : cplx(-1.0));

    const Vector theta = poly_from_inverse_roots(z);
    const Vector tc = cos_poly(theta);
    double num = 0.0, den = 0.0;
    const int G = 512;
    for (int j = 0; j <= G; ++j) {
        const double x = std::cos(std::numbers::pi * j / G);
        const double s = xeval(tc, x);
        num += s * xeval(p, x);
        den += s * s;
    }
    return {theta, den > 0.0 ? num / den : 0.0};
}

} // namespace

Vector power_transfer(const Vector& poly, const Vector& freqs) {
    Vector out(freqs.size());
    for (Index j = 0; j < freqs.size(); ++j) out(j) = std::norm(poly_eval(poly, std::polar(1.0, freqs(j))));
    return out;
}

HtdResult htd(int d, int D, int s, const std::vector<Vector>& Phi, const Vector& Theta, double etavar) {
    if (d < 0 || D < 0) throw ArgumentError("htd: differencing orders must be non-negative");
    if (D > 0 && s < 2) throw ArgumentError("htd: seasonal differencing needs a period of at least 2");
    if (!(etavar >= 0.0) || !std::isfinite(etavar)) throw DomainError("htd: disturbance variance must be non-negative");
    if (Theta.size() == 0 || Theta(0) != 1.0) throw ArgumentError("htd: Theta must have leading coefficient 1");
    for (const cplx& r : poly_roots(Theta))
        if (std::abs(r) < 1.0 - 1e-10) throw DomainError("htd: Theta is not invertible");

    const auto comps = arima_components(d + D, D, s, Phi);
    HtdResult out;
    out.phi = Phi;
    const std::size_t K = comps.size();
    std::vector<Vector> den, Dx;
    for (const auto& c : comps) {
        den.push_back(poly_mul(c.diff, c.phi));
        Dx.push_back(cos_poly(den.back()));
    }
    const Vector A = etavar * cos_poly(Theta);
    Index ntot = 0;
    for (const auto& dk : Dx) ntot += dk.size() - 1;
    const Index a = A.size() - 1;
    const Index nq = std::max<Index>(a - ntot + 1, 0);
    const Index neq = std::max(a, ntot - 1) + 1;

    // A = sum_k N_k prod_{j != k} D_j + Qr prod_j D_j, matched coefficient by coefficient
    Vector all = Vector::Ones(1);
    for (const auto& dk : Dx) all = poly_mul(all, dk);
    Matrix M = Matrix::Zero(neq, ntot + nq);
    Index col = 0;
    std::vector<Vector> others;
    for (std::size_t k = 0; k < K; ++k) {
        Vector o = Vector::Ones(1);
        for (std::size_t j = 0; j < K; ++j)
            if (j != k) o = poly_mul(o, Dx[j]);
        for (Index i = 0; i < Dx[k].size() - 1; ++i, ++col) M.col(col).segment(i, o.size()) = o;
    }
    for (Index i = 0; i < nq; ++i, ++col) M.col(col).segment(i, all.size()) = all;
    Vector rhs = Vector::Zero(neq);
    rhs.head(A.size()) = A;
    const Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) throw DomainError("htd: component AR factors are not coprime");
    const Vector sol = lu.solve(rhs);

    std::vector<Vector> N;
    col = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const Index nk = Dx[k].size() - 1;
        N.push_back(sol.segment(col, nk));
        col += nk;
    }
    const Vector Qr = nq ? Vector(sol.tail(nq)) : Vector(Vector::Zero(1));

    double irregular = 0.0;
    std::vector<Minimum> mins;
    for (std::size_t k = 0; k < K; ++k) {
        mins.push_back(ratio_minimum(N[k], Dx[k]));
        irregular += mins.back().value;
    }
    const bool extra = Qr.size() > 1 && max_abs(Qr.tail(Qr.size() - 1)) > 1e-12 * std::max(max_abs(Qr), etavar);
    std::optional<Minimum> qmin;
    if (extra) {
        qmin = ratio_minimum(Qr, Vector::Ones(1));
        irregular += qmin->value;
    } else {
        irregular += Qr(0);
    }
    if (irregular < -1e-8 * std::max(1.0, etavar))
        throw DomainError("htd: decomposition is not admissible (irregular variance " + std::to_string(irregular) + ")");
    irregular = std::max(irregular, 0.0);

    out.ksivar.resize(static_cast<Index>(K + (extra ? 1 : 0) + 1));
    for (std::size_t k = 0; k < K; ++k) {
        const Vector pk = xsub(N[k], mins[k].value * Dx[k]);
        auto [theta, var] = spectral_factor(pk, mins[k]);
        out.names.push_back(comps[k].name);
        out.theta.push_back(theta);
        out.ar.push_back(den[k]);
        out.ksivar(static_cast<Index>(k)) = std::max(var, 0.0);
    }
    if (extra) {
        Vector pq = Qr;
        pq(0) -= qmin->value;
        auto [theta, var] = spectral_factor(pq, qmin);
        out.names.push_back("extra MA");
        out.theta.push_back(theta);
        out.ar.push_back(Vector::Ones(1));
        out.ksivar(static_cast<Index>(K)) = std::max(var, 0.0);
    }
    out.ksivar(out.ksivar.size() - 1) = irregular;
    return out;
}

Matrix htd_component_spectra(const HtdResult& h, const Vector& freqs) {
    const auto K = static_cast<Index>(h.theta.size());
    Matrix out(K + 1, freqs.size());
    for (Index k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        out.row(k) = (h.ksivar(k) * power_transfer(h.theta[ks], freqs).array() / power_transfer(h.ar[ks], freqs).array())
                         .transpose();
    }
    out.row(K).setConstant(h.ksivar(K));
    return out;
}

namespace {

/// Splits a stationary AR polynomial by root frequency: positive real roots to the trend,
/// roots near a seasonal frequency to the seasonal, the rest to one transitory factor.
std::vector<Vector> allocate_ar(const Vector& phi, int s) {
    std::vector<cplx> trend, seas, trans;
    const double pi = std::numbers::pi;
    for (const cplx& root : poly_roots(phi)) {
        const double w = std::abs(std::arg(1.0 / root));
        if (w <= 1e-8) {
            trend.push_back(root);
            continue;
        }
        bool seasonal = false;
        if (s > 1)
            for (int k = 1; 2 * k <= s; ++k)
                if (std::abs(w - 2.0 * pi * k / s) <= pi / (2.0 * s)) seasonal = true;
        (seasonal ? seas : trans).push_back(root);
    }
    std::vector<Vector> out{poly_from_inverse_roots(trend), poly_from_inverse_roots(seas)};
    if (!trans.empty()) out.push_back(poly_from_inverse_roots(trans));
    for (auto& f : out) f(0) = 1.0;
    return out;
}

} // namespace

StateSpaceModel ssmhtd(const StateSpaceModel& model) {
    const Component* arima = nullptr;
    for (const auto& c : model.components) {
        if (c.arima) {
            if (arima) throw ArgumentError("ssmhtd: model has more than one ARIMA component");
            arima = &c;
        } else if (!c.noise || model.H.mat().cwiseAbs().maxCoeff() > 0.0) {
            throw ArgumentError("ssmhtd: model is not ARIMA-type (component '" + c.name + "')");
        }
    }
    if (!arima) throw ArgumentError("ssmhtd: model is not ARIMA-type");
    const ArimaInfo& info = *arima->arima;
    if (info.mean) throw ArgumentError("ssmhtd: models with a mean are not decomposed");
    if (info.d < info.D) throw ArgumentError("ssmhtd: seasonal sum models without regular differencing are not decomposed");
    Vector param(static_cast<Index>(arima->pmask.size()));
    for (std::size_t i = 0; i < arima->pmask.size(); ++i) param(static_cast<Index>(i)) = model.params.values()(arima->pmask[i]);
    Vector phi, theta;
    double var = 0.0;
    info.polys(param, phi, theta, var);

    std::vector<Vector> Phi = allocate_ar(phi, info.s);
    const HtdResult h = htd(info.d - info.D, info.D, info.s, Phi, theta, var);
    CatalogArgs a;
    a.d = info.d - info.D;
    a.D = info.D;
    a.s = info.s;
    a.phi = Phi;
    a.theta = h.theta;
    a.ksivar = h.ksivar;
    StateSpaceModel out = predefined("arimacom", a);
    return out;
}

// ---------------------------------------------------------------- selection

TimeSeriesData difference(const TimeSeriesData& y, int d, int D, int s) {
    if (d < 0 || D < 0) throw ArgumentError("differencing orders must be non-negative");
    if (D > 0 && s < 1) throw ArgumentError("seasonal period must be positive");
    const Vector op = poly_mul(diff_poly(d), spread_poly(diff_poly(D), std::max(s, 1)));
    const Index k = op.size() - 1;
    if (y.n() <= k) throw DataError("series is too short to difference");
    Matrix out = Matrix::Zero(y.p(), y.n() - k);
    const Matrix& v = y.values();
    for (Index t = k; t < y.n(); ++t)
        for (Index i = 0; i <= k; ++i) out.col(t - k) += op(i) * v.col(t - i);
    return TimeSeriesData(out);
}

namespace {

std::vector<double> observed_row(const TimeSeriesData& y) {
    if (y.p() != 1) throw ArgumentError("a univariate series is required");
    std::vector<double> out;
    for (Index t = 0; t < y.n(); ++t)
        if (!y.is_missing(0, t)) out.push_back(y(0, t));
    return out;
}

/// Least-squares AR coefficients of the demeaned series on the given lags.
Vector lag_regression(const std::vector<double>& x, const std::vector<int>& lags) {
    const int maxlag = *std::max_element(lags.begin(), lags.end());
    const auto n = static_cast<Index>(x.size());
    if (n <= maxlag + 2) return Vector::Zero(static_cast<Index>(lags.size()));
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    Matrix X(n - maxlag, static_cast<Index>(lags.size()));
    Vector yy(n - maxlag);
    for (Index t = maxlag; t < n; ++t) {
        yy(t - maxlag) = x[static_cast<std::size_t>(t)] - mean;
        for (std::size_t j = 0; j < lags.size(); ++j)
            X(t - maxlag, static_cast<Index>(j)) = x[static_cast<std::size_t>(t - lags[j])] - mean;
    }
    return Eigen::CompleteOrthogonalDecomposition<Matrix>(X).solve(yy);
}

/// Largest inverse root magnitude of 1 - c1 B - c2 B^2.
double unit_root_statistic(const std::vector<double>& x) {
    const Vector c = lag_regression(x, {1, 2});
    const double disc = c(0) * c(0) + 4.0 * c(1);
    if (disc < 0.0) return std::sqrt(-c(1));
    const double r = std::sqrt(disc);
    return 0.5 * std::max(std::abs(c(0) + r), std::abs(c(0) - r));
}

std::vector<double> diff_once(const std::vector<double>& x, int lag) {
    std::vector<double> out;
    for (std::size_t t = static_cast<std::size_t>(lag); t < x.size(); ++t) out.push_back(x[t] - x[t - static_cast<std::size_t>(lag)]);
    return out;
}

} // namespace

DiffDegree diffdegree(const TimeSeriesData& y, std::optional<int> s, std::pair<double, double> ub, double tsig) {
    if (s && *s < 1) throw ArgumentError("diffdegree: seasonal period must be positive");
    std::vector<double> x = observed_row(y);
    if (x.size() < 10) throw ArgumentError("diffdegree: at least 10 observations are required");
    const bool seasonal = s && *s > 1;
    DiffDegree out;
    while (true) {
        if (seasonal && x.size() > static_cast<std::size_t>(*s) + 4) {
            const double Phi = lag_regression(x, {*s})(0);
            if (Phi >= ub.second) {
                if (out.D >= 1) {
                    out.diagnostics.push_back("diffdegree: a second seasonal difference is indicated; capped at D = 1");
                } else {
                    x = diff_once(x, *s);
                    ++out.D;
                    continue;
                }
            }
        }
        if (unit_root_statistic(x) >= ub.first) {
            if (out.d >= 2) {
                out.diagnostics.push_back("diffdegree: a third regular difference is indicated; capped at d = 2");
            } else if (x.size() > 8) {
                x = diff_once(x, 1);
                ++out.d;
                continue;
            }
        }
        break;
    }
    double mean = 0.0, sq = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / static_cast<double>(x.size() - 1));
    const double scale = 1e-12 * (1.0 + std::abs(mean));
    if (sd <= scale) out.mean = std::abs(mean) > scale;
    else out.mean = std::abs(mean) / (sd / std::sqrt(static_cast<double>(x.size()))) >= tsig;
    return out;
}

Matrix ArmaDegree::bic_grid(int P0, int Q0) const {
    int mp = 0, mq = 0;
    for (const auto& c : cells) {
        mp = std::max(mp, c.p);
        mq = std::max(mq, c.q);
    }
    Matrix g = Matrix::Constant(mp + 1, mq + 1, kNaN);
    for (const auto& c : cells)
        if (c.P == P0 && c.Q == Q0) g(c.p, c.q) = c.bic;
    return g;
}

ArmaDegree armadegree(const TimeSeriesData& y, const ArmaDegreeOptions& opts) {
    if (y.p() != 1) throw ArgumentError("armadegree: a univariate series is required");
    if (opts.mr < 0 || opts.ms < 0) throw ArgumentError("armadegree: grid limits must be non-negative");
    const bool seasonal = opts.s && *opts.s > 1;
    const int ms = seasonal ? opts.ms : 0;
    ArmaDegree out;
    for (int P = 0; P <= ms; ++P)
        for (int Q = 0; Q <= ms; ++Q)
            for (int p = 0; p <= opts.mr; ++p)
                for (int q = 0; q <= opts.mr; ++q) out.cells.push_back(ArmaCell{p, q, P, Q, kNaN, false, {}});

    FitOptions fo = opts.fit;
    const Execution outer = fo.exec;
    fo.exec = Execution::Serial;
    detail::for_replicates(static_cast<Index>(out.cells.size()), outer, [&](Index i) {
        ArmaCell& c = out.cells[static_cast<std::size_t>(i)];
        ArimaSpec spec;
        spec.p = c.p;
        spec.q = c.q;
        spec.P = c.P;
        spec.Q = c.Q;
        spec.s = seasonal ? *opts.s : 1;
        spec.mean = opts.mean;
        try {
            const StateSpaceModel m = arima_model(spec);
            const FitResult r = fit(y, m, ParamStart::from_matrix(Matrix::Constant(1, 1, opts.param0), m.w()), {}, fo);
            c.bic = r.report.BIC;
            c.converged = r.report.converged;
            if (!std::isfinite(c.bic)) c.error = "non-finite BIC";
        } catch (const Error& e) {
            c.error = e.what();
        }
    });

    const ArmaCell* best = nullptr;
    for (const auto& c : out.cells) {
        if (!c.error.empty()) {
            out.diagnostics.push_back("armadegree: cell (" + std::to_string(c.p) + "," + std::to_string(c.q) + ")(" +
                                      std::to_string(c.P) + "," + std::to_string(c.Q) + ") skipped: " + c.error);
            continue;
        }
        if (!best) {
            best = &c;
            continue;
        }
        const int sz = c.p + c.q + c.P + c.Q, bsz = best->p + best->q + best->P + best->Q;
        if (c.bic < best->bic - 1e-9) best = &c;
        else if (std::abs(c.bic - best->bic) <= 1e-9) {
            if (sz < bsz || (sz == bsz && c.q + c.Q < best->q + best->Q)) best = &c;
        }
    }
    if (!best) throw NumericError("armadegree: every model in the grid failed to fit");
    out.p = best->p;
    out.q = best->q;
    out.P = best->P;
    out.Q = best->Q;
    out.bic = best->bic;
    return out;
}

ArimaSpec arimaselect(const TimeSeriesData& y, std::optional<int> s, const ArimaSelectOptions& opts) {
    if (y.p() != 1) throw ArgumentError("arimaselect: a univariate series is required");
    if (y.n() < 20) throw ArgumentError("arimaselect: at least 20 observations are required");
    const DiffDegree dd = diffdegree(y, s, opts.ub, opts.tsig);
    const int period = s.value_or(1);
    ArmaDegreeOptions ao;
    ao.s = s;
    ao.mean = dd.mean;
    ao.mr = opts.mr;
    ao.ms = opts.ms;
    ao.fit = opts.fit;
    const ArmaDegree ad = armadegree(difference(y, dd.d, dd.D, period), ao);
    ArimaSpec out;
    out.p = ad.p;
    out.d = dd.d;
    out.q = ad.q;
    out.P = ad.P;
    out.D = dd.D;
    out.Q = ad.Q;
    out.s = period;
    out.mean = dd.mean;
    return out;
}

bool loglevel(const TimeSeriesData& y, const ArimaSpec& family, const FitOptions& opts) {
    if (y.p() != 1) throw ArgumentError("loglevel: a univariate series is required");
    Matrix logs = y.values();
    double jac = 0.0;
    for (Index t = 0; t < y.n(); ++t) {
        if (y.is_missing(0, t)) continue;
        if (!(y(0, t) > 0.0)) throw DomainError("loglevel: the log branch needs positive data");
        logs(0, t) = std::log(y(0, t));
        jac += logs(0, t);
    }
    const StateSpaceModel m = arima_model(family);
    const ParamStart start = ParamStart::from_matrix(Matrix::Constant(1, 1, 0.1), m.w());
    const FitReport lev = fit(y, m, start, {}, opts).report;
    const FitReport lg = fit(TimeSeriesData(logs, y.missing()), m, start, {}, opts).report;
    // density of y under the log model: p(log y) / prod y
    const double bic_log = lg.BIC + 2.0 * jac / static_cast<double>(lg.n);
    return lev.BIC <= bic_log;
}

// ---------------------------------------------------------------- polynomials and forecasts

Vector randarma(int n, std::pair<double, double> r, std::uint64_t seed) {
    if (n < 0) throw ArgumentError("randarma: degree must be non-negative");
    if (!(r.first > 0.0 && r.first <= r.second && r.second < 1.0))
        throw ArgumentError("randarma: root magnitude range must satisfy 0 < lo <= hi < 1");
    const Vector u = uniforms(seed, 0, 2 * n + 1);
    std::vector<cplx> roots;  // inverse roots of the polynomial, i.e. the r_i
    Index k = 0;
    const double pi = std::numbers::pi;
    for (int i = 0; i + 1 < n; i += 2) {
        const double mag = r.first + (r.second - r.first) * u(k++);
        const double ang = pi * u(k++);
        roots.push_back(std::polar(mag, ang));
        roots.push_back(std::polar(mag, -ang));
    }
    if (n % 2) {
        const double mag = r.first + (r.second - r.first) * u(k++);
        roots.push_back(u(k++) < 0.5 ? -mag : mag);
    }
    std::vector<cplx> inv;
    for (const cplx& z : roots) inv.push_back(1.0 / z);
    Vector out = poly_from_inverse_roots(inv);
    out(0) = 1.0;
    return out;
}

OosForecast oosforecast(const TimeSeriesData& y, const StateSpaceModel& model, Index n1, const std::vector<Index>& h,
                        Execution exec) {
    const Index n = y.n();
    if (h.empty()) throw ArgumentError("oosforecast: at least one horizon is required");
    for (Index hh : h)
        if (hh < 1) throw ArgumentError("oosforecast: horizons must be at least 1");
    const Index hmax = *std::max_element(h.begin(), h.end());
    if (n1 < hmax || n1 >= n) throw ArgumentError("oosforecast: need max(h) <= n1 < n");
    OosForecast out;
    out.h = h;
    for (Index c = n - n1; c <= n - hmax; ++c) out.origins.push_back(c);
    const auto nc = static_cast<Index>(out.origins.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
        out.yf.push_back(Matrix::Zero(y.p(), nc));
        out.err.push_back(Matrix::Zero(y.p(), nc));
    }
    detail::for_replicates(nc, exec, [&](Index i) {
        const Index c = out.origins[static_cast<std::size_t>(i)];
        const Forecast f = forecast(y.head(c), model, hmax);
        for (std::size_t j = 0; j < h.size(); ++j) {
            out.yf[j].col(i) = f.mean.col(h[j] - 1);
            for (Index r = 0; r < y.p(); ++r)
                out.err[j](r, i) = y.is_missing(r, c + h[j] - 1) ? kNaN : f.mean(r, h[j] - 1) - y(r, c + h[j] - 1);
        }
    });
    for (std::size_t j = 0; j < h.size(); ++j) {
        RowVector ss(nc);
        double acc = 0.0;
        for (Index i = 0; i < nc; ++i) {
            for (Index r = 0; r < y.p(); ++r)
                if (!std::isnan(out.err[j](r, i))) acc += out.err[j](r, i) * out.err[j](r, i);
            ss(i) = acc;
        }
        out.SS.push_back(ss);
    }
    return out;
}

} // namespace ssm
