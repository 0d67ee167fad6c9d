#include "ssm/arima_tools.hpp"
#include "ssm/aux_math.hpp"
#include "ssm/catalog.hpp"
#include "ssm/smoother.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ssm;

namespace {

Execution exec_of(const benchmark::State& st) { return st.range(0) ? Execution::Parallel : Execution::Serial; }

StateSpaceModel bsm() {
    CatalogArgs s;
    s.type = "trig1";
    s.s = 12;
    StateSpaceModel m = combine_additive({predefined("llt"), predefined("seasonal", s)});
    m.set_param(Vector{{1.0, 0.1, 0.01, 0.05}});
    return m;
}

TimeSeriesData series(Eigen::Index n) {
    std::mt19937_64 g(1);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix y(1, n);
    double level = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        level += 0.3 * z(g);
        y(0, t) = level + 2.0 * std::sin(0.5236 * static_cast<double>(t)) + z(g);
    }
    return TimeSeriesData(y);
}

void BM_SimSmooth(benchmark::State& st) {
    const StateSpaceModel m = bsm();
    const TimeSeriesData y = series(240);
    SimOptions o;
    o.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(sim_smooth(y, m, 200, o));
}

void BM_BatchSmooth(benchmark::State& st) {
    const StateSpaceModel m = bsm();
    const TimeSeriesData y = series(240);
    std::vector<Matrix> ys;
    std::mt19937_64 g(2);
    std::normal_distribution<double> z(0.0, 0.1);
    for (int k = 0; k < 200; ++k) ys.push_back(y.values() + Matrix::NullaryExpr(1, 240, [&] { return z(g); }));
    for (auto _ : st) benchmark::DoNotOptimize(batch_smooth(ys, m, exec_of(st)));
}

void BM_MeanCov(benchmark::State& st) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Matrix> x;
    for (int k = 0; k < 500; ++k) x.push_back(Matrix::NullaryExpr(13, 240, [&] { return z(g); }));
    for (auto _ : st) benchmark::DoNotOptimize(meancov(x, true, exec_of(st)));
}

void BM_DiagInProd(benchmark::State& st) {
    std::mt19937_64 g(4);
    std::normal_distribution<double> z(0.0, 1.0);
    const Matrix A = Matrix::NullaryExpr(20, 20, [&] { return z(g); });
    const Matrix x1 = Matrix::NullaryExpr(20, 20000, [&] { return z(g); });
    const Matrix x2 = Matrix::NullaryExpr(20, 20000, [&] { return z(g); });
    for (auto _ : st) benchmark::DoNotOptimize(diaginprod(A, x1, x2, exec_of(st)));
}

void BM_OosForecast(benchmark::State& st) {
    const StateSpaceModel m = bsm();
    const TimeSeriesData y = series(240);
    for (auto _ : st) benchmark::DoNotOptimize(oosforecast(y, m, 60, {1, 6, 12}, exec_of(st)));
}

void BM_ArmaDegree(benchmark::State& st) {
    const TimeSeriesData y = difference(series(200), 1);
    ArmaDegreeOptions o;
    o.mr = 2;
    o.fit.exec = exec_of(st);
    // fit.exec selects how the grid cells run; each cell's own fit is serial
    for (auto _ : st) benchmark::DoNotOptimize(armadegree(y, o));
}

} // namespace

// argument 0 is the serial reference path, 1 the OpenMP path
BENCHMARK(BM_SimSmooth)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSmooth)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanCov)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiagInProd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OosForecast)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ArmaDegree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
