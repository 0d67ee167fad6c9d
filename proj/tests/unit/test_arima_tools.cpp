#include "doctest.h"
#include "helpers.hpp"

#include "ssm/arima_tools.hpp"
#include "ssm/catalog.hpp"
#include "ssm/kalman.hpp"
#include "ssm/linalg.hpp"
#include "ssm/smoother.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ssm;
using testing::max_abs_diff;

namespace {

Vector grid512() {
    Vector w(512);
    for (int j = 0; j < 512; ++j) w(j) = std::numbers::pi * (j + 0.5) / 512.0;
    return w;
}

Vector airline_theta(double th, double TH, int s) {
    return poly_mul(Vector{{1.0, th}}, spread_poly(Vector{{1.0, TH}}, s));
}

/// Relative error of the summed component spectra against the model pseudo-spectrum.
double reconstruction_error(const HtdResult& h, const Vector& Theta, const Vector& ar, double var) {
    const Vector w = grid512();
    const Matrix sp = htd_component_spectra(h, w);
    const Vector full = var * power_transfer(Theta, w).array() / power_transfer(ar, w).array();
    const Vector sum = sp.colwise().sum().transpose();
    return ((sum - full).array().abs() / full.array().abs()).maxCoeff();
}

TimeSeriesData simulate_arma(const Vector& phi, const Vector& theta, Eigen::Index n, std::uint64_t seed,
                             double offset = 0.0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const Eigen::Index burn = 200;
    std::vector<double> x(static_cast<std::size_t>(n + burn), 0.0), e(static_cast<std::size_t>(n + burn), 0.0);
    for (Eigen::Index t = 0; t < n + burn; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        e[ts] = z(g);
        double v = e[ts];
        for (Eigen::Index i = 1; i < phi.size(); ++i)
            if (t - i >= 0) v -= phi(i) * x[ts - static_cast<std::size_t>(i)];
        for (Eigen::Index i = 1; i < theta.size(); ++i)
            if (t - i >= 0) v += theta(i) * e[ts - static_cast<std::size_t>(i)];
        x[ts] = v;
    }
    Matrix y(1, n);
    for (Eigen::Index t = 0; t < n; ++t) y(0, t) = x[static_cast<std::size_t>(t + burn)] + offset;
    return TimeSeriesData(y);
}

TimeSeriesData random_walk(Eigen::Index n, std::uint64_t seed, double sd = 1.0, double start = 0.0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z(0.0, sd);
    Matrix y(1, n);
    double v = start;
    for (Eigen::Index t = 0; t < n; ++t) {
        v += z(g);
        y(0, t) = v;
    }
    return TimeSeriesData(y);
}

TimeSeriesData internet_differences() {
    const auto c = testing::read_columns(testing::data_path("wwwusage.csv"));
    const auto n = static_cast<Eigen::Index>(c[1].size()) - 1;
    Matrix y(1, n);
    for (Eigen::Index t = 0; t < n; ++t)
        y(0, t) = c[1][static_cast<std::size_t>(t + 1)] - c[1][static_cast<std::size_t>(t)];
    return TimeSeriesData(y);
}

} // namespace

TEST_CASE("htd of a pure irregular") {
    const HtdResult h = htd(0, 0, 1, {}, Vector::Ones(1), 2.0);
    CHECK(h.theta.empty());
    REQUIRE(h.ksivar.size() == 1);
    CHECK(h.ksivar(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("htd of an MA(1) splits off the canonical irregular") {
    // 1 + 0.5 B: spectrum 1.25 + cos w, minimum 0.25 at w = pi
    const HtdResult h = htd(0, 0, 1, {}, Vector{{1.0, 0.5}}, 1.0);
    REQUIRE(h.theta.size() == 1);
    CHECK(h.names[0] == "extra MA");
    CHECK(h.ksivar(1) == doctest::Approx(0.25).epsilon(1e-10));
    // remainder 1 + cos w = 0.5 |1 + e^{iw}|^2
    CHECK(max_abs_diff(h.theta[0], Vector{{1.0, 1.0}}) < 1e-8);
    CHECK(h.ksivar(0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("htd of the airline model reconstructs the pseudo-spectrum") {
    const Vector Theta = airline_theta(-0.4, -0.6, 12);
    const HtdResult h = htd(1, 1, 12, {}, Theta, 1.5);
    CHECK(h.names == std::vector<std::string>{"trend", "seasonal"});
    REQUIRE(h.ksivar.size() == 3);
    const Vector ar = poly_mul(diff_poly(1), spread_poly(diff_poly(1), 12));
    CHECK(reconstruction_error(h, Theta, ar, 1.5) < 1e-6);
    CHECK(h.theta[0].size() == 3);
    CHECK(h.theta[1].size() == 12);
    // canonical trend has a unit MA root at frequency pi
    CHECK(std::abs(poly_eval(h.theta[0], -1.0)) < 1e-8);
}

TEST_CASE("htd on random admissible airline parameters") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> uth(-0.9, 0.3), uTH(-0.9, -0.05);
    const Vector w = grid512();
    const Vector ar = poly_mul(diff_poly(1), spread_poly(diff_poly(1), 12));
    int admissible = 0;
    for (int trial = 0; admissible < 50 && trial < 500; ++trial) {
        const double th = uth(g), TH = uTH(g);
        const Vector Theta = airline_theta(th, TH, 12);
        HtdResult h;
        try {
            h = htd(1, 1, 12, {}, Theta, 1.0);
        } catch (const DomainError&) {
            continue;
        }
        ++admissible;
        CAPTURE(th);
        CAPTURE(TH);
        CHECK(reconstruction_error(h, Theta, ar, 1.0) < 1e-6);
        CHECK(h.ksivar.minCoeff() >= -1e-10);
        const Matrix sp = htd_component_spectra(h, w);
        for (Eigen::Index k = 0; k + 1 < sp.rows(); ++k) CHECK(sp.row(k).minCoeff() <= 1e-6 * sp.row(k).maxCoeff());
    }
    CHECK(admissible == 50);
}

TEST_CASE("htd with stationary AR factors") {
    const Vector Theta{{1.0, -0.3}};
    const std::vector<Vector> Phi{Vector{{1.0, -0.5}}, Vector(), Vector{{1.0, 0.0, 0.49}}};
    const HtdResult h = htd(1, 0, 1, Phi, Theta, 1.0);
    CHECK(h.names == std::vector<std::string>{"trend", "transitory 1"});
    Vector ar = poly_mul(diff_poly(1), Phi[0]);
    ar = poly_mul(ar, Phi[2]);
    CHECK(reconstruction_error(h, Theta, ar, 1.0) < 1e-6);
}

TEST_CASE("htd rejects invalid input") {
    CHECK_THROWS_AS((void)htd(1, 1, 12, {}, Vector{{1.0, -1.5}}, 1.0), DomainError);
    CHECK_THROWS_AS((void)htd(0, 1, 1, {}, Vector::Ones(1), 1.0), ArgumentError);
    CHECK_THROWS_AS((void)htd(-1, 0, 1, {}, Vector::Ones(1), 1.0), ArgumentError);
    CHECK_THROWS_AS((void)htd(0, 0, 1, {}, Vector{{2.0}}, 1.0), ArgumentError);
    // positive MA coefficients leave no room for a canonical irregular
    CHECK_THROWS_AS((void)htd(1, 1, 12, {}, airline_theta(0.5, 0.5, 12), 1.0), DomainError);
}

TEST_CASE("ssmhtd gives an observationally equivalent components model") {
    const auto c = testing::read_columns(testing::data_path("ukgas.csv"));
    Matrix v(1, static_cast<Eigen::Index>(c[1].size()));
    for (std::size_t t = 0; t < c[1].size(); ++t) v(0, static_cast<Eigen::Index>(t)) = std::log(c[1][t]);
    const TimeSeriesData y(v);
    CatalogArgs a;
    a.s = 4;
    StateSpaceModel air = predefined("airline", a);
    air.set_param(Vector{{-0.3, -0.5, 0.01}});
    const StateSpaceModel com = ssmhtd(air);
    CHECK(com.components.size() == 3);
    CHECK(std::abs(loglik(y, com) - loglik(y, air)) < 1e-6);

    // the signals of the decomposed model add up to the data less the irregular
    const SmoothResult s = smooth(y, com);
    const Matrix sig = signal_rows(s.alphahat, com);
    CHECK(sig.rows() == 2);
    CHECK(max_abs_diff(sig.colwise().sum() + s.epshat, v) < 1e-8);

    CatalogArgs ar;
    ar.p = 1;
    ar.d = 1;
    ar.q = 1;
    StateSpaceModel arima = predefined("arima", ar);
    arima.set_param(Vector{{0.6, -0.2, 0.3}});
    const auto yr = simulate_arma(Vector{{1.0, -1.6, 0.6}}, Vector{{1.0, -0.2}}, 120, 4);
    CHECK(std::abs(loglik(yr, ssmhtd(arima)) - loglik(yr, arima)) < 1e-6);
}

TEST_CASE("ssmhtd of a white noise model is a single irregular") {
    CatalogArgs a;
    a.p = 0;
    a.q = 0;
    StateSpaceModel m = predefined("arma", a);
    m.set_param(Vector{{2.5}});
    const StateSpaceModel com = ssmhtd(m);
    CHECK(com.m() == 0);
    CHECK(com.H.mat()(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
    const auto y = testing::random_data(1, 30, 5);
    CHECK(loglik(y, com) == doctest::Approx(loglik(y, m)).epsilon(1e-12));
}

TEST_CASE("ssmhtd rejects models it cannot decompose") {
    CHECK_THROWS_AS((void)ssmhtd(predefined("llm")), ArgumentError);
    CatalogArgs mean;
    mean.p = 1;
    mean.q = 0;
    mean.mean = true;
    CHECK_THROWS_AS((void)ssmhtd(predefined("arma", mean)), ArgumentError);
    CatalogArgs sum;
    sum.p = 0;
    sum.q = 1;
    sum.D = 1;
    sum.s = 4;
    CHECK_THROWS_AS((void)ssmhtd(predefined("sumarma", sum)), ArgumentError);
}

TEST_CASE("differencing") {
    const TimeSeriesData y(Matrix{{1.0, 4.0, 9.0, 16.0, 25.0}});
    CHECK(max_abs_diff(difference(y, 1).values(), Matrix{{3.0, 5.0, 7.0, 9.0}}) == 0.0);
    CHECK(max_abs_diff(difference(y, 2).values(), Matrix{{2.0, 2.0, 2.0}}) == 0.0);
    CHECK(max_abs_diff(difference(y, 0, 1, 2).values(), Matrix{{8.0, 12.0, 16.0}}) == 0.0);
    CHECK_THROWS_AS((void)difference(y, 5), DataError);
}

TEST_CASE("diffdegree on simulated series") {
    int wn_d0 = 0, wn_nomean = 0, rw_d1 = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const DiffDegree wn = diffdegree(simulate_arma(Vector::Ones(1), Vector::Ones(1), 300, seed));
        wn_d0 += wn.d == 0;
        wn_nomean += !wn.mean;
        const DiffDegree rw = diffdegree(random_walk(600, 100 + seed));
        rw_d1 += rw.d == 1;
    }
    CHECK(wn_d0 >= 18);
    CHECK(wn_nomean >= 11);
    CHECK(rw_d1 >= 18);

    Matrix trend(1, 60);
    for (Eigen::Index t = 0; t < 60; ++t) trend(0, t) = static_cast<double>(t + 1);
    const DiffDegree lin = diffdegree(TimeSeriesData(trend));
    CHECK(lin.d >= 1);
    CHECK(lin.mean);

    // y_t = y_{t-12} + e_t
    std::mt19937_64 g(3);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix sv(1, 240);
    for (Eigen::Index t = 0; t < 240; ++t) sv(0, t) = (t >= 12 ? sv(0, t - 12) : 5.0 * z(g)) + z(g);
    const DiffDegree seas = diffdegree(TimeSeriesData(sv), 12);
    CHECK(seas.D == 1);
    CHECK(seas.d == 0);
}

TEST_CASE("diffdegree caps the number of differences") {
    // a cubic needs three differences to become constant
    Matrix cubic(1, 80);
    for (Eigen::Index t = 0; t < 80; ++t) cubic(0, t) = std::pow(static_cast<double>(t), 3);
    const DiffDegree dd = diffdegree(TimeSeriesData(cubic));
    CHECK(dd.d == 2);
    CHECK_FALSE(dd.diagnostics.empty());
    CHECK_THROWS_AS((void)diffdegree(TimeSeriesData(Matrix::Zero(1, 5))), ArgumentError);
}

TEST_CASE("armadegree reproduces the internet users BIC table") {
    ArmaDegreeOptions o;
    o.mr = 5;
    const ArmaDegree ad = armadegree(internet_differences(), o);
    CHECK(ad.p == 1);
    CHECK(ad.q == 1);
    CHECK(ad.bic == doctest::Approx(5.2736).epsilon(5e-5 / 5.2736));
    const Matrix g = ad.bic_grid();
    CHECK(g(3, 0) == doctest::Approx(5.2765).epsilon(5e-5 / 5.2765));
    CHECK(g(0, 0) == doctest::Approx(6.3999).epsilon(5e-5 / 6.3999));
    CHECK(g(1, 0) == doctest::Approx(5.3983).epsilon(5e-5 / 5.3983));
    double second = kInf;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (!(i == 1 && j == 1) && std::isfinite(g(i, j))) second = std::min(second, g(i, j));
    CHECK(second == doctest::Approx(g(3, 0)));
}

TEST_CASE("armadegree picks AR(1) for simulated AR(1) data") {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ArmaDegree ad = armadegree(simulate_arma(Vector{{1.0, -0.8}}, Vector::Ones(1), 500, seed));
        hits += ad.p == 1 && ad.q == 0;
    }
    CHECK(hits >= 11);
}

TEST_CASE("armadegree is deterministic and covers the seasonal grid") {
    const auto y = simulate_arma(Vector{{1.0, -0.5}}, Vector::Ones(1), 150, 9);
    ArmaDegreeOptions o;
    o.mr = 1;
    o.s = 4;
    const ArmaDegree a = armadegree(y, o);
    const ArmaDegree b = armadegree(y, o);
    CHECK(a.cells.size() == 16);
    CHECK(a.p == b.p);
    CHECK(a.Q == b.Q);
    CHECK(a.bic == b.bic);
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK((a.cells[i].bic == b.cells[i].bic || a.cells[i].error == b.cells[i].error));
    o.fit.exec = Execution::Serial;
    CHECK(armadegree(y, o).bic == a.bic);
}

TEST_CASE("arimaselect on simulated series") {
    ArimaSelectOptions o;
    o.mr = 2;
    int wn = 0, rw = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ArimaSpec a = arimaselect(simulate_arma(Vector::Ones(1), Vector::Ones(1), 300, 300 + seed), {}, o);
        wn += a.p == 0 && a.d == 0 && a.q == 0;
        rw += arimaselect(random_walk(600, 400 + seed), {}, o).d == 1;
    }
    CHECK(wn >= 11);
    CHECK(rw >= 18);
    CHECK_THROWS_AS((void)arimaselect(random_walk(19, 1)), ArgumentError);
}

TEST_CASE("arima_model maps specs onto catalog codes") {
    ArimaSpec s;
    s.p = 2;
    s.q = 1;
    CHECK(arima_model(s).w() == 4);
    s.d = 1;
    CHECK(arima_model(s).components.front().arima->d == 1);
    const StateSpaceModel air = arima_model(ArimaSpec::airline(12));
    CHECK(air.w() == 3);
    CHECK(ArimaSpec::airline(4).str() == "(0,1,1)(0,1,1)4");
    ArimaSpec bad;
    bad.P = 1;
    CHECK_THROWS_AS((void)arima_model(bad), ArgumentError);
}

TEST_CASE("loglevel decisions") {
    ArimaSpec fam;
    fam.d = 1;
    fam.q = 1;
    int logs = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto lr = random_walk(200, seed, 0.1, std::log(50.0));
        Matrix v = lr.values().array().exp();
        logs += !loglevel(TimeSeriesData(v), fam);
    }
    CHECK(logs >= 18);

    const auto lev = random_walk(200, 77, 1.0, 1000.0);
    CHECK(loglevel(lev, fam));
    CHECK(loglevel(TimeSeriesData(Matrix(2.0 * lev.values())), fam));
    const auto lr = random_walk(200, 78, 0.1, std::log(50.0));
    const Matrix ev = lr.values().array().exp();
    CHECK(loglevel(TimeSeriesData(ev), fam) == loglevel(TimeSeriesData(Matrix(2.0 * ev)), fam));
    CHECK_THROWS_AS((void)loglevel(TimeSeriesData(Matrix{{1.0, -1.0, 2.0, 3.0}}), fam), DomainError);
}

TEST_CASE("randarma roots") {
    const Vector one = randarma(1, {0.5, 0.5}, 3);
    REQUIRE(one.size() == 2);
    CHECK(std::abs(one(1)) == doctest::Approx(0.5).epsilon(1e-14));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Vector p = randarma(4, {0.3, 0.8}, seed);
        REQUIRE(p.size() == 5);
        CHECK(p(0) == 1.0);
        for (const auto& z : poly_roots(p)) {
            const double inv = 1.0 / std::abs(z);
            CHECK(inv >= 0.3 - 1e-8);
            CHECK(inv <= 0.8 + 1e-8);
        }
    }
    CHECK(randarma(5, {0.2, 0.9}, 11) == randarma(5, {0.2, 0.9}, 11));
    CHECK(randarma(5, {0.2, 0.9}, 11) != randarma(5, {0.2, 0.9}, 12));
    CHECK_THROWS_AS((void)randarma(2, {0.5, 1.0}, 0), ArgumentError);
    CHECK_THROWS_AS((void)randarma(2, {0.6, 0.5}, 0), ArgumentError);
    CHECK_THROWS_AS((void)randarma(2, {0.0, 0.5}, 0), ArgumentError);
}

TEST_CASE("oosforecast of a deterministic trend has no error") {
    StateSpaceModel m;
    m.name = "deterministic trend";
    m.H = DynamicMatrix(Matrix::Zero(1, 1));
    m.Z = DynamicMatrix(Matrix{{1.0, 0.0}});
    m.T = DynamicMatrix(Matrix{{1.0, 1.0}, {0.0, 1.0}});
    m.R = DynamicMatrix(Matrix::Identity(2, 2));
    m.Q = DynamicMatrix(Matrix::Zero(2, 2));
    m.c = DynamicMatrix(Matrix::Zero(2, 1));
    m.a1 = DynamicMatrix(Matrix::Zero(2, 1));
    m.P1 = DynamicMatrix(Matrix(Vector::Constant(2, kInf).asDiagonal()));
    Matrix v(1, 30);
    for (Eigen::Index t = 0; t < 30; ++t) v(0, t) = 3.0 - 0.5 * static_cast<double>(t);
    const OosForecast f = oosforecast(TimeSeriesData(v), m, 10, {1, 3});
    CHECK(f.origins.front() == 20);
    CHECK(f.origins.back() == 27);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(f.err[j].cwiseAbs().maxCoeff() < 1e-8);
        CHECK(f.SS[j].cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("oosforecast of a random walk repeats the last value") {
    CatalogArgs a;
    a.d = 0;
    StateSpaceModel rw = predefined("lpt", a);
    rw.set_param(Vector{{0.7}});
    const auto y = random_walk(40, 5);
    const OosForecast f = oosforecast(y, rw, 12, {1});
    for (std::size_t i = 0; i < f.origins.size(); ++i)
        CHECK(f.yf[0](0, static_cast<Eigen::Index>(i)) == doctest::Approx(y(0, f.origins[i] - 1)).epsilon(1e-12));
}

TEST_CASE("oosforecast matches a manual truncate-and-refilter loop") {
    StateSpaceModel m = predefined("llm");
    m.set_param(Vector{{1.3, 0.2}});
    const auto y = testing::random_data(1, 50, 14, 0.05);
    const std::vector<Eigen::Index> hs{1, 2, 5};
    const OosForecast f = oosforecast(y, m, 15, hs);
    const OosForecast fs = oosforecast(y, m, 15, hs, Execution::Serial);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < f.origins.size(); ++i) {
            const Eigen::Index c = f.origins[i];
            const FilterResult fr = kalman_filter(y.head(c).extended(hs[j]), m);
            const Eigen::Index t = c + hs[j] - 1;
            const double pred = (m.Z.at(t) * fr.a.col(t).head(m.m()))(0);
            if (!y.is_missing(0, t)) acc += (pred - y(0, t)) * (pred - y(0, t));
            CHECK(f.SS[j](static_cast<Eigen::Index>(i)) == doctest::Approx(acc).epsilon(1e-10));
        }
        CHECK(f.SS[j] == fs.SS[j]);
    }
    CHECK_THROWS_AS((void)oosforecast(y, m, 3, {5}), ArgumentError);
    CHECK_THROWS_AS((void)oosforecast(y, m, 10, {0}), ArgumentError);
    CHECK_THROWS_AS((void)oosforecast(y, m, 50, {1}), ArgumentError);
}
