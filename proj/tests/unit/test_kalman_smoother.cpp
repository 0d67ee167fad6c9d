#include "doctest.h"
#include "helpers.hpp"
#include "oracle/oracle.hpp"

#include "ssm/kalman.hpp"
#include "ssm/smoother.hpp"

#include <cmath>

using namespace ssm;
using testing::max_abs_diff;

namespace {

struct Case {
    const char* name;
    testing::ModelShape shape;
    double missing;
};

const Case kCases[] = {
    {"proper prior", {3, 2, 2, 12, 0, false, false, false}, 0.0},
    {"two diffuse states", {3, 2, 2, 12, 2, false, false, false}, 0.0},
    {"diffuse with missing cells", {3, 2, 2, 15, 2, false, false, true}, 0.25},
    {"time varying", {3, 2, 2, 10, 1, true, false, true}, 0.1},
    {"correlated observation noise", {3, 3, 2, 10, 1, true, true, false}, 0.15},
    {"univariate with a diffuse state", {2, 1, 1, 14, 1, false, false, false}, 0.2},
};

double max_diff(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double out = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) out = std::max(out, max_abs_diff(a[t], b[t]));
    return out;
}

double scale(const Matrix& a) { return 1.0 + a.cwiseAbs().maxCoeff(); }
double scale(const std::vector<Matrix>& a) {
    double out = 1.0;
    for (const auto& m : a) out = std::max(out, scale(m));
    return out;
}

// The kappa oracle loses accuracy when a diffuse element is barely identified.
double min_diffuse_F(const FilterResult& f) {
    double out = kInf;
    for (const auto& steps : f.steps)
        for (const auto& st : steps)
            if (st.diffuse) out = std::min(out, st.Finf);
    return out;
}

} // namespace

TEST_CASE("filter and smoother agree with dense conditioning") {
    for (const auto& c : kCases) {
        const std::string name = c.name;
        CAPTURE(name);
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto model = testing::random_model(c.shape, seed);
            const auto y = testing::random_data(c.shape.p, c.shape.n, seed + 100, c.missing);
            const auto dense = oracle::condition(model, y, 1e7);
            const SmoothResult s = smooth(y, model);
            const double tol = 1e-6;

            CHECK(s.filter.loglik == doctest::Approx(dense.loglik_diffuse).epsilon(1e-6));
            CHECK(max_abs_diff(s.alphahat, dense.alphahat) < tol * scale(dense.alphahat));
            CHECK(max_diff(s.V, dense.V) < tol * scale(dense.V));
            CHECK(max_abs_diff(s.epshat, dense.epshat) < tol * scale(dense.epshat));
            CHECK(max_diff(s.epsvar, dense.epsvar) < tol * scale(dense.epsvar));
            CHECK(max_abs_diff(s.etahat, dense.etahat) < tol * scale(dense.etahat));
            CHECK(max_diff(s.etavar, dense.etavar) < tol * scale(dense.etavar));

            const Matrix pred = oracle::predicted_means(model, y, 1e7);
            // predicted means are only finite-valued once the diffuse phase is over
            const auto& f = s.filter;
            // with correlated H the filter runs on a state augmented by the noise
            if (!f.diffuse_unresolved && min_diffuse_F(f) > 1e-3)
                for (Eigen::Index t = f.d; t <= y.n(); ++t)
                    CHECK((f.a.col(t).head(pred.rows()) - pred.col(t)).cwiseAbs().maxCoeff() < 1e-4);
        }
    }
}

TEST_CASE("fast smoother matches the full smoother") {
    for (const auto& c : kCases) {
        const std::string name = c.name;
        CAPTURE(name);
        const auto model = testing::random_model(c.shape, 7);
        const auto y = testing::random_data(c.shape.p, c.shape.n, 8, c.missing);
        const SmoothResult s = smooth(y, model);
        const FastSmoothResult fs = fast_smooth(y, model);
        CHECK(max_abs_diff(fs.alphahat, s.alphahat) < 1e-10);
        CHECK(max_abs_diff(fs.epshat, s.epshat) < 1e-10);
        CHECK(max_abs_diff(fs.etahat, s.etahat) < 1e-10);
        CHECK(max_abs_diff(fast_state_smooth(y, model), s.alphahat) < 1e-10);
    }
}

TEST_CASE("stored gains reproduce smoothing of new data with the same missing pattern") {
    testing::ModelShape shape{3, 2, 2, 15, 2, false, false, true};
    const auto model = testing::random_model(shape, 11);
    const auto y1 = testing::random_data(2, 15, 12, 0.2);
    Matrix y2 = testing::random_data(2, 15, 13).values();
    for (Eigen::Index t = 0; t < 15; ++t)
        for (Eigen::Index i = 0; i < 2; ++i)
            if (y1.is_missing(i, t)) y2(i, t) = kNaN;
    const auto batch = batch_smooth({observations(y1), y2}, model, Execution::Serial);
    const auto direct = fast_smooth(TimeSeriesData(y2), model);
    CHECK(max_abs_diff(batch[1].alphahat, direct.alphahat) < 1e-9);
    CHECK(max_abs_diff(batch[1].epshat, direct.epshat) < 1e-9);
    CHECK(max_abs_diff(batch[1].etahat, direct.etahat) < 1e-9);

    Matrix y3 = y2;
    for (Eigen::Index t = 0; t < 15; ++t)
        if (!y1.is_missing(0, t)) {
            y3(0, t) = kNaN;
            break;
        }
    CHECK_THROWS_AS((void)batch_smooth({observations(y1), y3}, model, Execution::Serial), DataError);
}

TEST_CASE("diffuse loglik is the kappa limit") {
    testing::ModelShape shape{3, 1, 2, 20, 2, false, false, false};
    const auto model = testing::random_model(shape, 21);
    const auto y = testing::random_data(1, 20, 22);
    const double ld = loglik(y, model);
    for (double kappa : {1e5, 1e6}) {
        auto proper = model;
        Matrix P1 = proper.P1.mat();
        for (Eigen::Index i = 0; i < 2; ++i) P1(i, i) = kappa;
        proper.P1 = DynamicMatrix(P1);
        const double lk = loglik(y, proper) + 0.5 * 2.0 * std::log(kappa);
        CAPTURE(lk - ld);
        CHECK(std::abs(lk - ld) < 1e3 / kappa);
    }
}

TEST_CASE("filter structure") {
    // local linear trend
    StateSpaceModel model;
    model.Z = DynamicMatrix(Matrix{{1.0, 0.0}});
    model.H = DynamicMatrix(Matrix::Constant(1, 1, 0.5));
    model.T = DynamicMatrix(Matrix{{1.0, 1.0}, {0.0, 1.0}});
    model.R = DynamicMatrix(Matrix::Identity(2, 2));
    model.Q = DynamicMatrix(Matrix{{0.3, 0.0}, {0.0, 0.1}});
    model.c = DynamicMatrix(Matrix::Zero(2, 1));
    model.a1 = DynamicMatrix(Matrix::Zero(2, 1));
    model.P1 = DynamicMatrix(Matrix{{kInf, 0.0}, {0.0, kInf}});
    const auto y = testing::random_data(1, 10, 6);
    const FilterResult f = kalman_filter(y, model);
    CHECK(f.d == 2);
    CHECK(f.nobs == 10);
    CHECK(f.Pinf.size() == 2);
    CHECK(f.a.cols() == 11);
    CHECK(f.P.size() == 11);
    CHECK(!f.diffuse_unresolved);

    SUBCASE("a fully missing series leaves the diffuse phase unresolved") {
        Matrix yy = Matrix::Constant(1, 10, kNaN);
        const FilterResult g = kalman_filter(TimeSeriesData(yy), model);
        CHECK(g.diffuse_unresolved);
        CHECK(g.nobs == 0);
        CHECK(g.loglik == 0.0);
    }
    SUBCASE("wrong data dimension") {
        CHECK_THROWS_AS((void)kalman_filter(testing::random_data(2, 10, 1), model), StructuralError);
    }
    SUBCASE("infinite data") {
        Matrix yy = y.values();
        yy(0, 3) = kInf;
        CHECK_THROWS_AS((void)kalman_filter(TimeSeriesData(yy, BoolMatrix::Constant(1, 10, false)), model), DataError);
    }
}

TEST_CASE("forecast equals filtering through appended missing values") {
    testing::ModelShape shape{3, 2, 2, 12, 1, false, false, true};
    const auto model = testing::random_model(shape, 31);
    const auto y = testing::random_data(2, 12, 32);
    const Forecast fc = forecast(y, model, 4);
    const auto dense = oracle::condition(model, y.extended(4), 1e7);
    const Matrix Z = model.Z.mat();
    for (Eigen::Index k = 0; k < 4; ++k) {
        CHECK(max_abs_diff(fc.mean.col(k), Z * dense.alphahat.col(12 + k)) < 1e-5);
        const Matrix var = Z * dense.V[static_cast<std::size_t>(12 + k)] * Z.transpose() + model.H.mat();
        CHECK(max_abs_diff(fc.var[static_cast<std::size_t>(k)], var) < 1e-5);
    }
}

TEST_CASE("deterministic state with zero-variance observation is skipped") {
    // y = alpha, alpha constant and known: every F is zero
    StateSpaceModel m;
    m.Z = DynamicMatrix(Matrix::Ones(1, 1));
    m.H = DynamicMatrix(Matrix::Zero(1, 1));
    m.T = DynamicMatrix(Matrix::Ones(1, 1));
    m.R = DynamicMatrix(Matrix::Ones(1, 1));
    m.Q = DynamicMatrix(Matrix::Zero(1, 1));
    m.c = DynamicMatrix(Matrix::Zero(1, 1));
    m.a1 = DynamicMatrix(Matrix::Constant(1, 1, 2.0));
    m.P1 = DynamicMatrix(Matrix::Zero(1, 1));
    const auto y = TimeSeriesData::from_row({2.0, 2.0, 2.0});
    const FilterResult f = kalman_filter(y, m);
    CHECK(f.nobs == 0);
    CHECK(f.loglik == 0.0);
    const auto s = smooth(y, m);
    CHECK(s.alphahat(0, 1) == doctest::Approx(2.0));
}
