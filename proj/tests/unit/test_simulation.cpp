#include "doctest.h"
#include "helpers.hpp"

#include "ssm/catalog.hpp"
#include "ssm/smoother.hpp"

#include <cmath>

using namespace ssm;
using testing::max_abs_diff;

namespace {

StateSpaceModel local_level() {
    StateSpaceModel m = predefined("llm");
    m.set_param(Vector{{1.5, 0.4}});
    return m;
}

TimeSeriesData level_data() {
    auto y = testing::random_data(1, 40, 77, 0.1);
    Matrix v = y.values();
    double level = 0.0;
    for (Eigen::Index t = 0; t < v.cols(); ++t) {
        level += 0.6 * std::sin(0.3 * static_cast<double>(t));
        if (!y.is_missing(0, t)) v(0, t) += level;
    }
    return TimeSeriesData(v);
}

} // namespace

TEST_CASE("antithetic pairs average to the smoothed mean") {
    const auto y = level_data();
    std::vector<std::pair<std::string, StateSpaceModel>> models{{"local level", local_level()}};
    models.emplace_back("random diffuse", testing::random_model({3, 1, 2, 40, 1, false, false, false}, 3));
    for (const auto& [name, model] : models) {
        CAPTURE(name);
        SimOptions opts;
        opts.antithetic = true;
        opts.seed = 42;
        const Draws d = sim_smooth(y, model, 6, opts);
        const SmoothResult s = smooth(y, model);
        for (std::size_t j = 0; j < 6; j += 2) {
            CHECK(max_abs_diff(0.5 * (d.alpha[j] + d.alpha[j + 1]), s.alphahat) < 1e-10);
            CHECK(max_abs_diff(0.5 * (d.eps[j] + d.eps[j + 1]), s.epshat) < 1e-10);
            CHECK(max_abs_diff(0.5 * (d.eta[j] + d.eta[j + 1]), s.etahat) < 1e-10);
        }
    }
}

TEST_CASE("simulated states have the smoothed variance") {
    const auto y = level_data();
    const StateSpaceModel model = local_level();
    SimOptions opts;
    opts.seed = 7;
    const Eigen::Index N = 10000;
    const Draws d = sim_smooth(y, model, N, opts);
    const SmoothResult s = smooth(y, model);
    for (Eigen::Index t = 0; t < y.n(); ++t) {
        double sum = 0.0, sq = 0.0;
        for (const auto& a : d.alpha) {
            sum += a(0, t);
            sq += a(0, t) * a(0, t);
        }
        const double mean = sum / static_cast<double>(N);
        const double var = (sq - static_cast<double>(N) * mean * mean) / static_cast<double>(N - 1);
        const double V = s.V[static_cast<std::size_t>(t)](0, 0);
        CAPTURE(t);
        CHECK(std::abs(var / V - 1.0) < 0.1);
        CHECK(std::abs(mean - s.alphahat(0, t)) < 4.0 * std::sqrt(V / static_cast<double>(N)));
    }
}

TEST_CASE("simulation is reproducible and independent of scheduling") {
    const auto y = testing::random_data(2, 15, 5, 0.2);
    const auto model = testing::random_model({3, 2, 2, 15, 1, true, true, true}, 9);
    SimOptions serial;
    serial.seed = 123;
    serial.exec = Execution::Serial;
    SimOptions parallel = serial;
    parallel.exec = Execution::Parallel;
    const Draws a = sim_smooth(y, model, 9, serial);
    const Draws b = sim_smooth(y, model, 9, parallel);
    const Draws c = sim_smooth(y, model, 9, serial);
    for (std::size_t j = 0; j < 9; ++j) {
        CHECK(a.alpha[j] == b.alpha[j]);
        CHECK(a.eps[j] == b.eps[j]);
        CHECK(a.alpha[j] == c.alpha[j]);
    }
    SimOptions other = serial;
    other.seed = 124;
    CHECK(sim_smooth(y, model, 1, other).alpha[0] != a.alpha[0]);

    SampleOptions so;
    so.seed = 5;
    so.exec = Execution::Serial;
    const Samples s1 = sample(model, 15, 4, so);
    so.exec = Execution::Parallel;
    const Samples s2 = sample(model, 15, 4, so);
    for (std::size_t j = 0; j < 4; ++j) CHECK(s1.y[j] == s2.y[j]);
}

TEST_CASE("simulated draws respect the observation equation") {
    // with H = 0 every draw reproduces the observed data exactly
    StateSpaceModel m = predefined("lpt", [] {
        CatalogArgs a;
        a.d = 1;
        return a;
    }());
    m.set_param(Vector{{0.5, 0.1}});
    const auto y = testing::random_data(1, 20, 2, 0.2);
    const Draws d = sim_smooth(y, m, 3);
    for (const auto& a : d.alpha)
        for (Eigen::Index t = 0; t < 20; ++t)
            if (!y.is_missing(0, t)) CHECK(a(0, t) == doctest::Approx(y(0, t)).epsilon(1e-9));
}

TEST_CASE("unconditional samples have the model moments") {
    CatalogArgs a;
    a.p = 1;
    a.q = 0;
    StateSpaceModel m = predefined("arma", a);
    m.set_param(Vector{{0.8, 2.0}});
    SampleOptions so;
    so.seed = 3;
    const Eigen::Index N = 20000;
    const Samples s = sample(m, 3, N, so);
    // stationary AR(1): var = sigma^2 / (1 - phi^2), lag-one covariance phi var
    const double var = 2.0 / (1.0 - 0.64);
    double v0 = 0.0, c1 = 0.0;
    for (const auto& y : s.y) {
        v0 += y(0, 2) * y(0, 2);
        c1 += y(0, 1) * y(0, 2);
    }
    v0 /= static_cast<double>(N);
    c1 /= static_cast<double>(N);
    CHECK(v0 == doctest::Approx(var).epsilon(0.05));
    CHECK(c1 == doctest::Approx(0.8 * var).epsilon(0.05));
    CHECK(s.y[0].cols() == 3);
    CHECK(s.alpha[0].rows() == m.m());
}

TEST_CASE("diffuse samples use the given diffuse variance") {
    const StateSpaceModel m = local_level();
    SampleOptions so;
    so.seed = 11;
    const Samples fixed = sample(m, 2, 50, so);
    for (const auto& a : fixed.alpha) CHECK(a(0, 0) == 0.0);
    so.diffuse_var = 100.0;
    const Samples wide = sample(m, 2, 4000, so);
    double sq = 0.0;
    for (const auto& a : wide.alpha) sq += a(0, 0) * a(0, 0);
    CHECK(sq / 4000.0 == doctest::Approx(100.0).epsilon(0.08));
}

TEST_CASE("simulation argument errors") {
    const auto y = level_data();
    CHECK_THROWS_AS((void)sim_smooth(y, local_level(), 0), ArgumentError);
    CHECK_THROWS_AS((void)sample(local_level(), 0, 1), ArgumentError);
    SampleOptions so;
    so.diffuse_var = -1.0;
    CHECK_THROWS_AS((void)sample(local_level(), 5, 1, so), ArgumentError);
    CHECK_THROWS_AS((void)sim_smooth(y, predefined("poisson"), 1), ArgumentError);
}
