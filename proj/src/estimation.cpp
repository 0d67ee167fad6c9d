#include "ssm/estimation.hpp"

#include "ssm/detail/parallel.hpp"
#include "ssm/kalman.hpp"
#include "ssm/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace ssm {

Minimizer minimizer_from_string(const std::string& s) {
    if (s == "simplex") return Minimizer::Simplex;
    if (s == "bfgs") return Minimizer::Bfgs;
    throw ArgumentError("unknown minimizer '" + s + "'");
}

Display display_from_string(const std::string& s) {
    if (s == "off") return Display::Off;
    if (s == "notify") return Display::Notify;
    if (s == "final") return Display::Final;
    if (s == "iter") return Display::Iter;
    throw ArgumentError("unknown display level '" + s + "'");
}

namespace {

class Counted {
public:
    Counted(const Objective& f) : f_(f) {}

    double operator()(const Vector& x) {
        ++count_;
        double v;
        try {
            v = f_(x);
        } catch (const DomainError&) {
            v = kInf;
        } catch (const NumericError&) {
            v = kInf;
        }
        return std::isnan(v) ? kInf : v;
    }

    [[nodiscard]] long count() const { return count_; }
    void add(long k) { count_ += k; }

private:
    const Objective& f_;
    long count_ = 0;
};

std::ostream& out(const OptimOptions& o) { return o.log ? *o.log : std::clog; }

void record(OptimResult& r, int it, long evals, double f) {
    const double best = r.trace.empty() ? f : std::min(r.trace.back().best, f);
    r.trace.push_back({it, evals, best});
}

void finish_message(const OptimResult& r, const OptimOptions& o, const char* name) {
    if (o.disp == Display::Final || o.disp == Display::Iter)
        out(o) << name << ": " << (r.converged ? "converged" : "stopped") << " after " << r.iterations
               << " iterations, " << r.evaluations << " evaluations, f = " << r.fval << '\n';
    else if (o.disp == Display::Notify && !r.converged)
        out(o) << name << ": maximum number of iterations reached, f = " << r.fval << '\n';
}

double first_value(Counted& f, const Vector& x0) {
    const double f0 = f(x0);
    if (!std::isfinite(f0)) throw NumericError("objective is not finite at the starting point");
    return f0;
}

} // namespace

OptimResult minimize_simplex(const Objective& objective, const Vector& x0, const OptimOptions& opts) {
    Counted f(objective);
    const Eigen::Index k = x0.size();
    OptimResult r;
    r.x = x0;
    r.fval = first_value(f, x0);
    record(r, 0, f.count(), r.fval);
    if (k == 0) {
        r.converged = true;
        r.evaluations = f.count();
        return r;
    }
    const double xtol = std::sqrt(opts.tol);

    std::vector<Vector> pts{x0};
    std::vector<double> vals{r.fval};
    for (Eigen::Index i = 0; i < k; ++i) {
        Vector x = x0;
        x(i) += 0.5 * std::max(1.0, std::abs(x0(i)));
        pts.push_back(x);
        vals.push_back(f(x));
    }
    std::vector<std::size_t> order(pts.size());

    int it = 0;
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];

        double fspread = 0.0, xspread = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            fspread = std::max(fspread, std::abs(vals[i] - vals[best]));
            xspread = std::max(xspread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
        }
        if (std::isfinite(vals[best]) && fspread <= opts.tol && xspread <= xtol) {
            r.converged = true;
            break;
        }
        if (it >= opts.maxiter) break;
        ++it;

        Vector centroid = Vector::Zero(k);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
        centroid /= static_cast<double>(k);

        const Vector xr = centroid + (centroid - pts[worst]);
        const double fr = f(xr);
        if (fr < vals[best]) {
            const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                      : Vector(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = f(xc);
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = f(pts[i]);
                }
            }
        }
        const double fbest = *std::min_element(vals.begin(), vals.end());
        record(r, it, f.count(), fbest);
        if (opts.disp == Display::Iter) out(opts) << "simplex " << it << ": f = " << fbest << '\n';
    }
    const auto b = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    r.x = pts[b];
    r.fval = vals[b];
    r.iterations = it;
    r.evaluations = f.count();
    if (r.trace.back().evaluations != r.evaluations) record(r, it, r.evaluations, r.fval);
    finish_message(r, opts, "simplex");
    return r;
}

namespace {

Vector gradient(Counted& f, const Objective& raw, const Vector& x, Execution exec) {
    const Eigen::Index k = x.size();
    Vector g(k);
    if (exec == Execution::Serial) {
        for (Eigen::Index i = 0; i < k; ++i) {
            const double h = 1e-6 * (1.0 + std::abs(x(i)));
            Vector xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            g(i) = (f(xp) - f(xm)) / (2.0 * h);
        }
        return g;
    }
    // the counter is not shared across threads; evaluations are added afterwards
    detail::for_replicates(k, exec, [&](Eigen::Index i) {
        Counted local(raw);
        const double h = 1e-6 * (1.0 + std::abs(x(i)));
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (local(xp) - local(xm)) / (2.0 * h);
    });
    f.add(2 * k);
    return g;
}

} // namespace

OptimResult minimize_bfgs(const Objective& objective, const Vector& x0, const OptimOptions& opts) {
    Counted f(objective);
    const Eigen::Index k = x0.size();
    OptimResult r;
    Vector x = x0;
    double fx = first_value(f, x0);
    record(r, 0, f.count(), fx);
    if (k == 0) {
        r.x = x;
        r.fval = fx;
        r.converged = true;
        r.evaluations = f.count();
        return r;
    }

    Matrix Hinv = Matrix::Identity(k, k);
    Vector g = gradient(f, objective, x, opts.exec);
    bool reset = true;
    int it = 0;
    while (true) {
        if (!g.allFinite()) break;
        if (g.cwiseAbs().maxCoeff() <= opts.tol * (1.0 + std::abs(fx))) {
            r.converged = true;
            break;
        }
        if (it >= opts.maxiter) break;
        ++it;

        Vector dir = -Hinv * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            Hinv.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
            reset = true;
        }
        // with an identity metric keep the first trial step at unit length in the largest coordinate
        double step = reset ? std::min(1.0, 1.0 / dir.cwiseAbs().maxCoeff()) : 1.0;
        double fnew = kInf;
        Vector xnew;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = x + step * dir;
            fnew = f(xnew);
            if (fnew <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (reset) {
                // no descent along the gradient: the finite-difference gradient is at its noise floor
                r.converged = g.cwiseAbs().maxCoeff() <= std::sqrt(opts.tol) * (1.0 + std::abs(fx));
                break;
            }
            Hinv.setIdentity();
            reset = true;
            --it;
            continue;
        }
        const Vector gnew = gradient(f, objective, xnew, opts.exec);
        const Vector s = xnew - x, yv = gnew - g;
        const double sy = s.dot(yv);
        const double change = fx - fnew;
        x = xnew;
        fx = fnew;
        g = gnew;
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (reset) Hinv *= sy / yv.squaredNorm();
            const double rho = 1.0 / sy;
            const Matrix I = Matrix::Identity(k, k);
            Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
            reset = false;
        }
        record(r, it, f.count(), fx);
        if (opts.disp == Display::Iter) out(opts) << "bfgs " << it << ": f = " << fx << '\n';
        if (change <= opts.tol * 1e-3 && s.cwiseAbs().maxCoeff() <= std::sqrt(opts.tol) * 1e-2) {
            r.converged = true;
            break;
        }
    }
    r.x = x;
    r.fval = fx;
    r.iterations = it;
    r.evaluations = f.count();
    if (r.trace.back().evaluations != r.evaluations) record(r, it, r.evaluations, r.fval);
    finish_message(r, opts, "bfgs");
    return r;
}

OptimResult minimize(Minimizer which, const Objective& f, const Vector& x0, const OptimOptions& opts) {
    return which == Minimizer::Bfgs ? minimize_bfgs(f, x0, opts) : minimize_simplex(f, x0, opts);
}

ParamStart ParamStart::from_matrix(const Matrix& spec, Eigen::Index w) {
    ParamStart s;
    if (spec.size() == 0) return s;
    if (spec.size() == 1) {
        s.values = Vector::Constant(w, spec(0, 0));
        return s;
    }
    if ((spec.rows() == 1 || spec.cols() == 1) && spec.size() == w) {
        s.values = spec.reshaped();
        return s;
    }
    if (spec.rows() == 2 && spec.cols() == w) {
        s.values = spec.row(0).transpose();
        s.free.resize(static_cast<std::size_t>(w));
        for (Eigen::Index i = 0; i < w; ++i) s.free[static_cast<std::size_t>(i)] = spec(1, i) != 0.0;
        return s;
    }
    throw ArgumentError("param0 must be a scalar, a vector of length " + std::to_string(w) + " or a 2 x " +
                        std::to_string(w) + " matrix");
}

ParamStart ParamStart::mask(BoolVector free) {
    ParamStart s;
    s.free = std::move(free);
    return s;
}

double aic(double logL, Eigen::Index w, Eigen::Index n) {
    return (-2.0 * logL + 2.0 * static_cast<double>(w)) / static_cast<double>(n);
}

double bic(double logL, Eigen::Index w, Eigen::Index n) {
    return (-2.0 * logL + static_cast<double>(w) * std::log(static_cast<double>(n))) / static_cast<double>(n);
}

namespace {

double laplace_loglik(const TimeSeriesData& y, const StateSpaceModel& model, const GaussApproximation& approx) {
    const double gauss = loglik(approx.ytilde, approx.model);
    const FastSmoothResult s = fast_smooth(approx.ytilde, approx.model);
    Draws mode;
    mode.alpha.push_back(s.alphahat);
    mode.eps.push_back(s.epshat);
    mode.eta.push_back(s.etahat);
    return gauss + log_weights(model, approx, y, mode, Execution::Serial)(0);
}

} // namespace

double fit_objective_loglik(const TimeSeriesData& y, const StateSpaceModel& model, const Matrix& alpha0,
                            const ApproxOptions& approx) {
    if (model.is_gaussian()) return loglik(y, model, approx.filter);
    return laplace_loglik(y, model, gauss_approximate(y, model, alpha0, approx));
}

FitResult fit(const TimeSeriesData& y, const StateSpaceModel& model, const ParamStart& start, const Matrix& alpha0,
              const FitOptions& opts) {
    const Eigen::Index w = model.w();
    if (start.values.size() != 0 && start.values.size() != w)
        throw ArgumentError("param0 has " + std::to_string(start.values.size()) + " values for " + std::to_string(w) +
                            " parameters");
    if (!start.free.empty() && static_cast<Eigen::Index>(start.free.size()) != w)
        throw ArgumentError("parameter mask has " + std::to_string(start.free.size()) + " entries for " +
                            std::to_string(w) + " parameters");
    if (opts.nsamp < 0) throw ArgumentError("nsamp must be nonnegative");

    StateSpaceModel base = model;
    if (start.values.size() != 0) base.set_param(start.values);
    const Vector psi0 = base.psi();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < w; ++i)
        if (start.free.empty() || start.free[static_cast<std::size_t>(i)]) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());

    auto full_psi = [&](const Vector& x) {
        Vector psi = psi0;
        for (Eigen::Index j = 0; j < k; ++j) psi(idx[static_cast<std::size_t>(j)]) = x(j);
        return psi;
    };
    const Objective objective = [&](const Vector& x) {
        return -fit_objective_loglik(y, apply_updates(base, full_psi(x)), alpha0, opts.approx);
    };

    Vector x0(k);
    for (Eigen::Index j = 0; j < k; ++j) x0(j) = psi0(idx[static_cast<std::size_t>(j)]);

    FitResult res{base, {}};
    FitReport& rep = res.report;
    if (k > 0) {
        const double f0 = objective(x0);
        if (!std::isfinite(f0)) throw NumericError("log likelihood is not finite at the initial parameters");
        OptimOptions oo;
        oo.tol = opts.tol;
        oo.maxiter = opts.maxiter;
        oo.disp = opts.disp;
        oo.exec = opts.exec;
        oo.log = opts.log;
        const OptimResult opt = minimize(opts.fmin, objective, x0, oo);
        res.model = apply_updates(base, full_psi(opt.x));
        rep.iterations = opt.iterations;
        rep.evaluations = opt.evaluations + 1;
        rep.converged = opt.converged;
        rep.trace = opt.trace;
    }

    if (res.model.is_gaussian()) {
        rep.logL = loglik(y, res.model, opts.approx.filter);
    } else {
        GaussApproximation approx = gauss_approximate(y, res.model, alpha0, opts.approx);
        if (opts.nsamp > 0) {
            ImportanceOptions io;
            io.nsamp = opts.nsamp;
            io.seed = opts.seed;
            io.exec = opts.exec;
            rep.logL = importance_loglik(y, res.model, approx, io).loglik;
        } else {
            rep.logL = laplace_loglik(y, res.model, approx);
        }
        rep.ytilde = approx.ytilde;
        rep.approx = std::move(approx);
    }
    rep.w = k;
    rep.n = y.n();
    rep.AIC = aic(rep.logL, k, rep.n);
    rep.BIC = bic(rep.logL, k, rep.n);
    return res;
}

} // namespace ssm
