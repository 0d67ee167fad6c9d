// Acceptance driver: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include "oracle/oracle.hpp"
#include "unit/helpers.hpp"

#include "ssm/arima_tools.hpp"
#include "ssm/catalog.hpp"
#include "ssm/estimation.hpp"
#include "ssm/io.hpp"
#include "ssm/kalman.hpp"
#include "ssm/linalg.hpp"
#include "ssm/nongauss.hpp"
#include "ssm/smoother.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace ssm;
namespace fs = std::filesystem;
using testing::max_abs_diff;

namespace {

const fs::path kData = SSM_TEST_DATA;

struct Outcome {
    enum Kind { Pass, Fail, Skip } kind = Pass;
    std::vector<std::string> notes;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            kind = Fail;
            failures.push_back(what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome skip(const std::string& reason) {
    Outcome o;
    o.kind = Outcome::Skip;
    o.note(reason);
    return o;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(const Matrix& a, const Matrix& b) { return max_abs_diff(a, b) / (1.0 + b.cwiseAbs().maxCoeff()); }

double rel_err(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return kInf;
    double out = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) out = std::max(out, rel_err(a[t], b[t]));
    return out;
}

// ---------------------------------------------------------------- 1

Outcome seatbelt_univariate() {
    if (!fs::exists(kData / "seatbelts.csv")) return skip("fixture seatbelts.csv absent");
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const io::CsvTable t = io::read_csv(kData / "seatbelts.csv");
    const auto n = static_cast<Eigen::Index>(t.rows());
    const TimeSeriesData y = io::series_from_table(t, {"drivers"}, true);
    CatalogArgs s;
    s.type = "trig1";
    s.s = 12;
    CatalogArgs iv;
    iv.n = n;
    iv.type = "step";
    iv.tau = {170};
    CatalogArgs rg;
    rg.x = io::series_from_table(t, {"PetrolPrice"}, true).values();
    const StateSpaceModel model = combine_additive(
        {predefined("llm"), predefined("seasonal", s), predefined("intv", iv), predefined("reg", rg)});
    const FitResult r = fit(y, model, ParamStart::from_matrix(Matrix{{10.0, 0.1, 0.001}}, model.w()));
    const SmoothResult sm = smooth(y, r.model);
    const double secs = seconds_since(t0);

    o.note("logL " + fmt("%.4f", r.report.logL));
    o.check(r.report.converged, "fit did not converge");
    o.check(std::abs(r.report.logL - 175.7790) <= 0.05, "logL off by more than 0.05");
    const Vector ref{{0.0037862, 0.00026768, 1.162e-6}};
    const Vector got = r.model.params.values();
    for (Eigen::Index i = 0; i < 3; ++i) {
        o.note(r.model.params.names()[static_cast<std::size_t>(i)] + " " + fmt("%.5g", got(i)));
        o.check(std::abs(got(i) / ref(i) - 1.0) <= 0.05, "parameter " + std::to_string(i) + " outside 5%");
    }
    const double intv = sm.alphahat(12, n - 1), petrol = sm.alphahat(13, n - 1);
    o.note("intervention " + fmt("%.5f", intv) + ", petrol " + fmt("%.5f", petrol));
    o.check(std::abs(intv + 0.23773) <= 5e-4, "intervention coefficient");
    o.check(std::abs(petrol + 0.2914) <= 5e-4, "petrol coefficient");
    o.note(fmt("%.2f s", secs));
    o.check(secs < 30.0, "runtime");
    return o;
}

// ---------------------------------------------------------------- 2

TimeSeriesData internet_differences() {
    const io::CsvTable t = io::read_csv(kData / "wwwusage.csv");
    return difference(io::series_from_table(t), 1);
}

Outcome internet_arma() {
    if (!fs::exists(kData / "wwwusage.csv")) return skip("fixture wwwusage.csv absent");
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const double table[6][6] = {{6.3999, 5.6060, 5.3299, 5.3601, 5.4189, 5.3984},
                                {5.3983, 5.2736, 5.3195, 5.3288, 5.3603, 5.3985},
                                {5.3532, 5.3199, 5.3629, 5.3675, 5.3970, 5.4436},
                                {5.2765, 5.3224, 5.3714, 5.4166, 5.4525, 5.4909},
                                {5.3223, 5.3692, 5.4142, 5.4539, 5.4805, 5.4915},
                                {5.3689, 5.4124, 5.4617, 5.5288, 5.5364, 5.5871}};
    const TimeSeriesData y = internet_differences();
    ArmaDegreeOptions opts;
    opts.mr = 5;
    const ArmaDegree ad = armadegree(y, opts);
    const Matrix g = ad.bic_grid();
    int within = 0;
    std::string off;
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) {
            if (std::abs(g(p, q) - table[p][q]) <= 0.01) {
                ++within;
            } else {
                off += " (" + std::to_string(p) + "," + std::to_string(q) + ")" + fmt("%+.4f", g(p, q) - table[p][q]);
            }
        }
    o.note(std::to_string(within) + "/36 cells within 0.01");
    if (!off.empty()) o.note("off:" + off);
    o.check(within == 36, "BIC table cells outside 0.01");

    double second = kInf;
    int sp = -1, sq = -1;
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q)
            if (!(p == ad.p && q == ad.q) && g(p, q) < second) {
                second = g(p, q);
                sp = p;
                sq = q;
            }
    o.note("min (" + std::to_string(ad.p) + "," + std::to_string(ad.q) + ")=" + fmt("%.4f", ad.bic) + ", runner-up (" +
           std::to_string(sp) + "," + std::to_string(sq) + ")=" + fmt("%.4f", second));
    o.check(ad.p == 1 && ad.q == 1 && std::abs(ad.bic - 5.2736) <= 5e-5, "minimum cell");
    o.check(sp == 3 && sq == 0 && std::abs(second - 5.2765) <= 5e-5, "runner-up cell");

    // missing points and a 20 step forecast with the chosen model
    Matrix v = y.values();
    for (int k : {6, 16, 26, 36, 46, 56, 66, 72, 73, 74, 75, 76, 86, 96}) v(0, k - 1) = kNaN;
    const TimeSeriesData ym(v);
    CatalogArgs a;
    a.p = 1;
    a.q = 1;
    const StateSpaceModel arma = predefined("arma", a);
    const FitResult r = fit(ym, arma, ParamStart::from_matrix(Matrix::Constant(1, 1, 0.1), arma.w()));
    o.check(r.report.converged, "fit with missing points did not converge");
    const Eigen::Index n = ym.n(), h = 20;
    Matrix ext = Matrix::Constant(1, n + h, kNaN);
    ext.leftCols(n) = v;
    const TimeSeriesData ye(ext);
    const FilterResult f = kalman_filter(ye, r.model);
    const SmoothResult s = smooth(ye, r.model);
    const Forecast fc = forecast(ym, r.model, h);
    double gap = 0.0, gap_fc = 0.0;
    for (Eigen::Index j = 0; j < h; ++j) {
        const Eigen::Index t = n + j;
        const double yf = (r.model.Z.at(t) * f.a.col(t))(0);
        const double ys = (r.model.Z.at(t) * s.alphahat.col(t))(0);
        gap = std::max(gap, std::abs(yf - ys));
        gap_fc = std::max(gap_fc, std::abs(yf - fc.mean(0, j)));
    }
    o.note("filter/smoother forecast gap " + fmt("%.1e", gap));
    o.check(gap <= 1e-10, "filter and smoother forecasts differ");
    o.check(gap_fc <= 1e-10, "forecast() differs from the filter");
    const double secs = seconds_since(t0);
    o.note(fmt("%.1f s", secs));
    o.check(secs < 120.0, "runtime");
    return o;
}

// ---------------------------------------------------------------- 3

Outcome seatbelt_bivariate() {
    if (!fs::exists(kData / "seatbelts.csv")) return skip("fixture seatbelts.csv absent");
    Outcome o;
    const io::CsvTable t = io::read_csv(kData / "seatbelts.csv");
    const auto n = static_cast<Eigen::Index>(t.rows());
    const TimeSeriesData y = io::series_from_table(t, {"front", "rear"}, true);
    Matrix x(2, n);
    x.row(0) = io::series_from_table(t, {"PetrolPrice"}, true).values();
    x.row(1) = io::series_from_table(t, {"kms"}, true).values();
    CatalogArgs lv;
    lv.p = 2;
    CatalogArgs s;
    s.p = 2;
    s.cov = BoolVector{};
    s.type = "trig fixed";
    s.s = 12;
    CatalogArgs iv;
    iv.p = 2;
    iv.n = n;
    iv.types = {"step", "null"};
    iv.tau = {170};
    CatalogArgs rg;
    rg.p = 2;
    rg.x = x;
    const StateSpaceModel model = combine_additive(
        {predefined("mvllm", lv), predefined("mvseasonal", s), predefined("mvintv", iv), predefined("mvreg", rg)});
    o.check(model.w() == 6, "expected 6 parameters");
    const Matrix start{{0.0054, 0.0086, 0.0045, 0.00027, 0.00024, 0.00023}};
    const FitResult r = fit(y, model, ParamStart::from_matrix(start, model.w()));
    const SmoothResult sm = smooth(y, r.model);
    const double coef = sm.alphahat(24, n - 1);
    o.note("logL " + fmt("%.4f", r.report.logL) + ", front intervention " + fmt("%.5f", coef) + " (target -0.30025)");
    o.check(r.report.converged, "fit did not converge");
    o.check(std::abs(coef + 0.30025) <= 5e-3, "front-seat intervention coefficient");
    return o;
}

// ---------------------------------------------------------------- 4

StateSpaceModel poisson_level(double a1, double P1, double q) {
    CatalogArgs lp;
    lp.d = 0;
    StateSpaceModel m = combine_additive({predefined("poisson"), predefined("lpt", lp)});
    m.set_param(Vector::Constant(1, q));
    m.a1 = DynamicMatrix(Matrix::Constant(1, 1, a1));
    m.P1 = DynamicMatrix(Matrix::Constant(1, 1, P1));
    return m;
}

Outcome nongaussian() {
    if (!fs::exists(kData / "seatbelts.csv") || !fs::exists(kData / "ukgas.csv"))
        return skip("fixture seatbelts.csv or ukgas.csv absent");
    Outcome o;
    FitOptions bfgs;
    bfgs.fmin = Minimizer::Bfgs;

    const io::CsvTable t = io::read_csv(kData / "seatbelts.csv");
    const auto n = static_cast<Eigen::Index>(t.rows());
    const TimeSeriesData van = io::series_from_table(t, {"VanKilled"});
    CatalogArgs s12;
    s12.type = "dummy fixed";
    s12.s = 12;
    CatalogArgs iv;
    iv.n = n;
    iv.type = "step";
    iv.tau = {170};
    const StateSpaceModel pm = combine_additive(
        {predefined("poisson"), predefined("llm"), predefined("seasonal", s12), predefined("intv", iv)});
    const FitResult rp = fit(van, pm, ParamStart::from_matrix(Matrix::Constant(1, 1, 0.0006), pm.w()), {}, bfgs);
    o.note("van: logL " + fmt("%.3f", rp.report.logL) + ", approx iterations " +
           std::to_string(rp.report.approx ? rp.report.approx->iterations : -1));
    o.check(rp.report.converged, "van fit did not converge");
    o.check(rp.report.approx && rp.report.approx->converged && rp.report.approx->iterations <= 100,
            "van approximation loop");

    const io::CsvTable g = io::read_csv(kData / "ukgas.csv");
    const TimeSeriesData gas = io::series_from_table(g, {}, true);
    CatalogArgs s4;
    s4.type = "dummy";
    s4.s = 4;
    const StateSpaceModel tm = combine_additive({predefined("t"), predefined("llt"), predefined("seasonal", s4)});
    const FitResult rt =
        fit(gas, tm, ParamStart::from_matrix(Matrix{{0.0018, 4.0, 7.7e-10, 7.9e-6, 0.0033}}, tm.w()), {}, bfgs);
    o.note("gas: logL " + fmt("%.3f", rt.report.logL) + ", approx iterations " +
           std::to_string(rt.report.approx ? rt.report.approx->iterations : -1));
    o.check(rt.report.converged, "gas fit did not converge");
    o.check(rt.report.approx && rt.report.approx->converged && rt.report.approx->iterations <= 100,
            "gas approximation loop");

    const std::vector<double> counts{1, 0, 3, 2, 1};
    const double a1 = 0.2, P1 = 0.8, q = 0.3;
    const StateSpaceModel toy = poisson_level(a1, P1, q);
    const auto yt = TimeSeriesData::from_row(counts);
    const GaussApproximation ga = gauss_approximate(yt, toy);
    ImportanceOptions io;
    io.nsamp = 2000;
    io.seed = 5;
    const double ll = importance_loglik(yt, toy, ga, io).loglik;
    const double ref = oracle::level_model_marginal(
        counts, a1, P1, q, [](double yv, double th) { return yv * th - std::exp(th) - std::lgamma(yv + 1.0); });
    o.note("toy: importance " + fmt("%.4f", ll) + " vs quadrature " + fmt("%.4f", ref));
    o.check(ga.converged && ga.iterations <= 100, "toy approximation loop");
    o.check(std::abs(ll - ref) <= 0.05, "toy importance loglik");
    return o;
}

// ---------------------------------------------------------------- 5

Outcome oracle_equivalence() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 g(2024);
    std::uniform_int_distribution<int> um(1, 3), up(1, 2), un(1, 8), coin(0, 1);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        testing::ModelShape sh;
        sh.m = um(g);
        sh.p = up(g);
        sh.r = std::uniform_int_distribution<int>(1, static_cast<int>(sh.m))(g);
        sh.n = un(g);
        sh.diffuse = 0;
        sh.dynamic = coin(g);
        sh.full_H = sh.p > 1 && coin(g);
        sh.intercept = coin(g);
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(k);
        const StateSpaceModel model = testing::random_model(sh, seed);
        const TimeSeriesData y = testing::random_data(sh.p, sh.n, seed + 7, coin(g) ? 0.2 : 0.0);
        const oracle::Dense d = oracle::condition(model, y);
        const SmoothResult s = smooth(y, model);
        const Matrix pred = oracle::predicted_means(model, y);
        double e = std::abs(s.filter.loglik - d.loglik) / (1.0 + std::abs(d.loglik));
        e = std::max({e, rel_err(s.alphahat, d.alphahat), rel_err(s.V, d.V), rel_err(s.epshat, d.epshat),
                      rel_err(s.etahat, d.etahat), rel_err(s.epsvar, d.epsvar), rel_err(s.etavar, d.etavar),
                      rel_err(Matrix(s.filter.a.topRows(pred.rows())), pred)});
        worst = std::max(worst, e);
    }
    const double secs = seconds_since(t0);
    o.note("200 models, worst relative error " + fmt("%.1e", worst) + ", " + fmt("%.2f s", secs));
    o.check(worst <= 1e-8, "dense oracle mismatch");
    o.check(secs < 60.0, "runtime");
    return o;
}

// ---------------------------------------------------------------- 6

Outcome diffuse_correctness() {
    Outcome o;
    const double kappa = 1e7;
    std::mt19937_64 g(77);
    std::uniform_int_distribution<int> coin(0, 1);
    double worst = 0.0;
    int d_checked = 0, d_matched = 0, redrawn = 0;
    for (int k = 0, seed_k = 0; k < 50; ++seed_k) {
        testing::ModelShape sh;
        sh.m = 2 + coin(g);
        sh.diffuse = 1 + coin(g);
        sh.p = 1 + coin(g);
        sh.r = 2;
        sh.n = 12 + 2 * coin(g);
        sh.dynamic = coin(g);
        sh.intercept = coin(g);
        const bool full = sh.p == 1 && coin(g);
        const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(seed_k);
        const StateSpaceModel model = testing::random_model(sh, seed);
        const TimeSeriesData y = testing::random_data(sh.p, sh.n, seed + 3, full ? 0.0 : 0.15);
        const SmoothResult sd = smooth(y, model);
        // e.g. two static random walks behind one static row: no kappa limit exists
        if (sd.filter.diffuse_unresolved) {
            ++redrawn;
            continue;
        }
        ++k;
        StateSpaceModel proper = model;
        Matrix P1 = proper.P1.mat();
        for (Eigen::Index i = 0; i < sh.diffuse; ++i) P1(i, i) = kappa;
        proper.P1 = DynamicMatrix(P1);
        const SmoothResult sk = smooth(y, proper);
        const Eigen::Index d = sd.filter.d;
        double e = 0.0;
        for (Eigen::Index t = d; t < y.n(); ++t) {
            const auto ts = static_cast<std::size_t>(t);
            e = std::max({e, rel_err(Matrix(sd.alphahat.col(t)), Matrix(sk.alphahat.col(t))), rel_err(sd.V[ts], sk.V[ts]),
                          rel_err(Matrix(sd.epshat.col(t)), Matrix(sk.epshat.col(t))),
                          rel_err(Matrix(sd.etahat.col(t)), Matrix(sk.etahat.col(t)))});
        }
        for (Eigen::Index t = d; t <= y.n(); ++t) {
            const auto ts = static_cast<std::size_t>(t);
            e = std::max(e, rel_err(Matrix(sd.filter.a.col(t)), Matrix(sk.filter.a.col(t))));
            e = std::max(e, rel_err(sd.filter.P[ts], sk.filter.P[ts]));
        }
        for (Eigen::Index t = d; t < y.n(); ++t) {
            const auto ts = static_cast<std::size_t>(t);
            const Matrix vd = sd.filter.v.col(t), vk = sk.filter.v.col(t);
            const Matrix md = vd.array().isNaN().select(0.0, vd), mk = vk.array().isNaN().select(0.0, vk);
            e = std::max(e, rel_err(md, mk));
            e = std::max(e, rel_err(sd.filter.F[ts], sk.filter.F[ts]));
        }
        worst = std::max(worst, e);
        if (full) {
            ++d_checked;
            if (d == sh.diffuse) ++d_matched;
        }
    }
    o.note("50 models (" + std::to_string(redrawn) + " unidentified draws replaced), worst relative error " +
           fmt("%.1e", worst) + " from t = d on");
    o.note("d equals the diffuse count in " + std::to_string(d_matched) + "/" + std::to_string(d_checked) +
           " fully observed univariate cases");
    o.check(worst <= 1e-3, "kappa comparison");
    o.check(d_checked > 0 && d_matched == d_checked, "diffuse horizon");
    return o;
}

// ---------------------------------------------------------------- 7

Outcome simulation_smoother() {
    Outcome o;
    StateSpaceModel level = predefined("llm");
    level.set_param(Vector{{1.5, 0.4}});
    TimeSeriesData y = testing::random_data(1, 40, 77, 0.1);
    {
        Matrix v = y.values();
        double mu = 0.0;
        for (Eigen::Index t = 0; t < v.cols(); ++t) {
            mu += 0.6 * std::sin(0.3 * static_cast<double>(t));
            if (!y.is_missing(0, t)) v(0, t) += mu;
        }
        y = TimeSeriesData(v);
    }
    double anti = 0.0;
    for (const StateSpaceModel& m : {level, testing::random_model({3, 1, 2, 40, 1, false, false, false}, 3)}) {
        SimOptions so;
        so.antithetic = true;
        so.seed = 42;
        const Draws dr = sim_smooth(y, m, 10, so);
        const SmoothResult s = smooth(y, m);
        for (std::size_t j = 0; j + 1 < dr.alpha.size(); j += 2) {
            anti = std::max(anti, max_abs_diff(0.5 * (dr.alpha[j] + dr.alpha[j + 1]), s.alphahat));
            anti = std::max(anti, max_abs_diff(0.5 * (dr.eps[j] + dr.eps[j + 1]), s.epshat));
            anti = std::max(anti, max_abs_diff(0.5 * (dr.eta[j] + dr.eta[j + 1]), s.etahat));
        }
    }
    o.note("antithetic gap " + fmt("%.1e", anti));
    o.check(anti <= 1e-10, "antithetic averages");

    SimOptions so;
    so.seed = 7;
    const Eigen::Index N = 10000;
    const Draws dr = sim_smooth(y, level, N, so);
    const SmoothResult s = smooth(y, level);
    double worst = 0.0;
    for (Eigen::Index t = 0; t < y.n(); ++t) {
        double sum = 0.0, sq = 0.0;
        for (const auto& a : dr.alpha) {
            sum += a(0, t);
            sq += a(0, t) * a(0, t);
        }
        const double mean = sum / static_cast<double>(N);
        const double var = (sq - static_cast<double>(N) * mean * mean) / static_cast<double>(N - 1);
        worst = std::max(worst, std::abs(var / s.V[static_cast<std::size_t>(t)](0, 0) - 1.0));
    }
    o.note("worst variance ratio deviation " + fmt("%.3f", worst));
    o.check(worst <= 0.1, "empirical variance");
    return o;
}

// ---------------------------------------------------------------- 8

Outcome htd_airline() {
    Outcome o;
    Vector w(512);
    for (int j = 0; j < 512; ++j) w(j) = std::numbers::pi * (j + 0.5) / 512.0;
    const Vector ar = poly_mul(diff_poly(1), spread_poly(diff_poly(1), 12));
    TimeSeriesData y = testing::random_data(1, 96, 3);
    if (fs::exists(kData / "seatbelts.csv"))
        y = io::series_from_table(io::read_csv(kData / "seatbelts.csv"), {"drivers"}, true);
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> uth(-0.9, 0.3), uTH(-0.9, -0.05), uvar(0.001, 0.02);
    int admissible = 0;
    double recon = 0.0, minima = 0.0, lik = 0.0;
    for (int trial = 0; admissible < 50 && trial < 1000; ++trial) {
        const double th = uth(g), TH = uTH(g), var = uvar(g);
        const Vector Theta = poly_mul(Vector{{1.0, th}}, spread_poly(Vector{{1.0, TH}}, 12));
        HtdResult h;
        try {
            h = htd(1, 1, 12, {}, Theta, var);
        } catch (const DomainError&) {
            continue;
        }
        ++admissible;
        const Matrix sp = htd_component_spectra(h, w);
        const Vector full = var * power_transfer(Theta, w).array() / power_transfer(ar, w).array();
        const Vector sum = sp.colwise().sum().transpose();
        recon = std::max(recon, ((sum - full).array().abs() / full.array().abs()).maxCoeff());
        for (Eigen::Index k = 0; k + 1 < sp.rows(); ++k)
            minima = std::max(minima, sp.row(k).minCoeff() / sp.row(k).maxCoeff());

        CatalogArgs a;
        a.s = 12;
        StateSpaceModel air = predefined("airline", a);
        air.set_param(Vector{{th, TH, var}});
        lik = std::max(lik, std::abs(loglik(y, ssmhtd(air)) - loglik(y, air)));
    }
    o.note(std::to_string(admissible) + " points, reconstruction " + fmt("%.1e", recon) + ", minima " +
           fmt("%.1e", minima) + " of max, loglik gap " + fmt("%.1e", lik));
    o.check(admissible == 50, "not enough admissible points");
    o.check(recon < 1e-6, "pseudo-spectrum reconstruction");
    o.check(minima <= 1e-6, "canonical minima");
    o.check(lik <= 1e-6, "decomposed model loglik");
    return o;
}

// ---------------------------------------------------------------- 9

const fs::path kWork = SSM_CLI_WORK;

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + SSM_CLI + "\" " + args + " >>\"" + (kWork / "log.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (!fs::exists(b / e.path().filename()) || bytes(e.path()) != bytes(b / e.path().filename())) return false;
        ++files;
    }
    return files > 0 && files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator{}));
}

Outcome cli() {
    Outcome o;
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    const fs::path models = kData / "models";
    const std::string data = "--data " + q(kData / "seatbelts.csv") + " --columns drivers --log";
    const std::string model = " --model " + q(models / "seatbelt.json");

    bool identical = true;
    for (const char* cmd : {"fit", "filter", "smooth", "forecast"}) {
        const fs::path a = kWork / (std::string(cmd) + "_a"), b = kWork / (std::string(cmd) + "_b");
        std::string extra = std::string(cmd) == "forecast" ? " --horizon 12" : "";
        const int ra = run_cli(std::string(cmd) + " " + data + model + extra + " --out " + q(a));
        const int rb = run_cli(std::string(cmd) + " " + data + model + extra + " --out " + q(b));
        const bool ok = ra == 0 && rb == 0 && same_tree(a, b);
        if (!ok) o.note(std::string(cmd) + " rerun differs or failed");
        identical = identical && ok;
    }
    o.check(identical, "byte-identical reruns");

    std::ofstream(kWork / "bad.json") << "{\"components\": [{\"code\": \"llm\"}";
    std::ofstream(kWork / "text.csv") << "t,y\n1,abc\n";
    const std::string www = " --data " + q(kData / "wwwusage.csv");
    const int usage = run_cli("bogus");
    const int modelerr = run_cli("fit" + www + " --model " + q(kWork / "bad.json") + " --out " + q(kWork / "x"));
    const int dataerr = run_cli("fit --data " + q(kWork / "text.csv") + " --model " + q(models / "llm.json") +
                                " --out " + q(kWork / "x"));
    const int numeric = run_cli("fit " + data + model + " --maxiter 3 --out " + q(kWork / "nc"));
    o.note("exit codes usage " + std::to_string(usage) + ", model " + std::to_string(modelerr) + ", data " +
           std::to_string(dataerr) + ", numeric " + std::to_string(numeric));
    o.check(usage == 1 && modelerr == 2 && dataerr == 3 && numeric == 4, "exit-code contract");

    std::size_t checked = 0;
    bool exact = true;
    for (const auto& e : fs::recursive_directory_iterator(kWork)) {
        if (e.path().extension() != ".csv" || e.path().filename() == "text.csv") continue;
        const io::CsvTable t = io::read_csv(e.path());
        Matrix rows(static_cast<Eigen::Index>(t.header.size()) - 1, static_cast<Eigen::Index>(t.rows()));
        for (std::size_t j = 1; j < t.header.size(); ++j)
            for (std::size_t r = 0; r < t.rows(); ++r)
                rows(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(r)) = t.columns[j][r];
        const fs::path copy = kWork / "roundtrip.tmp";
        io::write_csv(copy, t.header, rows, t.columns[0]);
        if (bytes(copy) != bytes(e.path())) {
            exact = false;
            o.note("round trip differs: " + e.path().filename().string());
        }
        fs::remove(copy);
        ++checked;
    }
    o.note(std::to_string(checked) + " csv files round-tripped");
    o.check(exact && checked > 0, "csv round trip");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 seatbelt univariate structural model", seatbelt_univariate},
        {"2 internet users ARMA grid and forecast", internet_arma},
        {"3 bivariate seatbelt intervention", seatbelt_bivariate},
        {"4 Poisson van drivers, t gas, Poisson toy", nongaussian},
        {"5 dense oracle equivalence", oracle_equivalence},
        {"6 exact diffuse against large kappa", diffuse_correctness},
        {"7 simulation smoother", simulation_smoother},
        {"8 canonical decomposition of airline models", htd_airline},
        {"9 command line contract", cli},
    };
    int failed = 0;
    for (const auto& [name, body] : criteria) {
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o.kind = Outcome::Fail;
            o.failures.push_back(std::string("exception: ") + e.what());
        }
        const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
        std::string line = std::string(tag) + "  " + name;
        std::string detail;
        for (const auto& s : o.notes) detail += (detail.empty() ? "" : "; ") + s;
        for (const auto& s : o.failures) detail += (detail.empty() ? "failed: " : "; failed: ") + s;
        if (!detail.empty()) line += "  [" + detail + "]";
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        if (o.kind == Outcome::Fail) ++failed;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
