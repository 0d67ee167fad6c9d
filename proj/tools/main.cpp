#include "ssm/arima_tools.hpp"
#include "ssm/estimation.hpp"
#include "ssm/io.hpp"
#include "ssm/kalman.hpp"
#include "ssm/nongauss.hpp"
#include "ssm/smoother.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ssm;
using Eigen::Index;

namespace {

enum Exit { kOk = 0, kInternal = 1, kModel = 2, kData = 3, kNumeric = 4 };

struct RunConfig {
    std::string command;
    std::string data;
    std::string model;
    std::string out = ".";
    std::vector<std::string> columns;
    bool log = false;
    std::uint64_t seed = 0;
    std::string fmin = "simplex";
    double tol = 1e-6;
    int maxiter = 500;
    std::string disp = "off";
    Index nsamp = 500;
    Index horizon = 0;
    Index draws = 0;
    Index length = 0;
    int period = 0;
    int max_order = 3;
    int max_seasonal = 1;
    int diff = -1;
    int sdiff = -1;
    std::string mean = "auto";
};

struct Loaded {
    TimeSeriesData y;
    std::vector<double> time;
    std::vector<std::string> names;
};

Loaded load_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw DataError("--data is required for '" + cfg.command + "'");
    const io::CsvTable table = io::read_csv(cfg.data);
    Loaded out;
    out.y = io::series_from_table(table, cfg.columns, cfg.log);
    const bool has_time = table.header[0] == "t" || table.header[0] == "time" || table.header[0] == "Time";
    if (has_time) {
        out.time = table.columns[0];
        for (double v : out.time)
            if (!std::isfinite(v)) throw DataError("time column has empty or non-finite cells");
    } else {
        for (Index t = 0; t < out.y.n(); ++t) out.time.push_back(static_cast<double>(t + 1));
    }
    out.names = cfg.columns;
    if (out.names.empty()) out.names.assign(table.header.begin() + (has_time ? 1 : 0), table.header.end());
    return out;
}

std::string model_text(const RunConfig& cfg) {
    if (cfg.model.empty()) throw ArgumentError("--model is required for '" + cfg.command + "'");
    try {
        return io::read_text(cfg.model);
    } catch (const DataError& e) {
        throw ArgumentError(e.what());
    }
}

StateSpaceModel load_model(const RunConfig& cfg, Index n) {
    const fs::path base = fs::path(cfg.model).parent_path();
    return io::model_from_json(model_text(cfg), base, n);
}

FitOptions fit_options(const RunConfig& cfg) {
    FitOptions o;
    o.fmin = minimizer_from_string(cfg.fmin);
    o.disp = display_from_string(cfg.disp);
    o.tol = cfg.tol;
    o.maxiter = cfg.maxiter;
    o.nsamp = cfg.nsamp;
    o.seed = cfg.seed;
    o.log = &std::cerr;
    return o;
}

std::vector<double> future_time(const std::vector<double>& time, Index h) {
    const double step = time.size() >= 2 ? time[time.size() - 1] - time[time.size() - 2] : 1.0;
    const double last = time.empty() ? 0.0 : time.back();
    std::vector<double> out;
    for (Index k = 1; k <= h; ++k) out.push_back(last + step * static_cast<double>(k));
    return out;
}

std::vector<std::string> with_time(std::vector<std::string> cols) {
    cols.insert(cols.begin(), "t");
    return cols;
}

std::vector<std::string> numbered(const std::string& stem, Index k) {
    std::vector<std::string> out;
    for (Index i = 1; i <= k; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

/// Matrix of the diagonals of a sequence of square matrices, one column per element.
Matrix diagonals(const std::vector<Matrix>& seq, Index count) {
    const Index k = seq.empty() ? 0 : seq.front().rows();
    Matrix out(k, count);
    for (Index t = 0; t < count; ++t) out.col(t) = seq[static_cast<std::size_t>(t)].diagonal();
    return out;
}

void write_json(const fs::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

json number_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

/// Component signals as columns: one per component for univariate data, component/variable pairs otherwise.
void write_components(const fs::path& path, const StateSpaceModel& model, const Matrix& alpha, const Loaded& d) {
    const std::vector<Matrix> sig = signal(alpha, model);
    std::vector<std::string> names;
    for (const auto& c : model.components)
        if (!c.noise) names.push_back(c.name);
    Matrix rows(static_cast<Index>(sig.size()) * model.p(), alpha.cols());
    std::vector<std::string> header;
    for (std::size_t k = 0; k < sig.size(); ++k)
        for (Index i = 0; i < model.p(); ++i) {
            rows.row(static_cast<Index>(k) * model.p() + i) = sig[k].row(i);
            const std::string nm = k < names.size() ? names[k] : "component " + std::to_string(k + 1);
            header.push_back(model.p() == 1 ? nm : nm + " " + d.names[static_cast<std::size_t>(i)]);
        }
    io::write_csv(path, with_time(header), rows, d.time);
}

int cmd_fit(const RunConfig& cfg) {
    const Loaded d = load_data(cfg);
    const StateSpaceModel model = load_model(cfg, d.y.n());
    const FitResult r = fit(d.y, model, {}, {}, fit_options(cfg));
    const fs::path out = cfg.out;
    io::write_atomic(out / "model_fitted.json", io::model_to_json(model_text(cfg), r.model, fs::path(cfg.model).parent_path()));
    json rep;
    rep["logL"] = number_json(r.report.logL);
    rep["AIC"] = number_json(r.report.AIC);
    rep["BIC"] = number_json(r.report.BIC);
    json params = json::object();
    const auto& names = r.model.params.names();
    for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = number_json(r.model.params.values()(static_cast<Index>(i)));
    rep["params"] = params;
    rep["converged"] = r.report.converged;
    rep["iterations"] = r.report.iterations;
    rep["evaluations"] = r.report.evaluations;
    rep["n"] = r.report.n;
    rep["w"] = r.report.w;
    write_json(out / "report.json", rep);
    if (r.report.ytilde) {
        io::write_csv(out / "ytilde.csv", with_time(d.names), observations(*r.report.ytilde), d.time);
    }
    if (!r.report.converged) {
        std::cerr << "ssm fit: optimizer did not converge in " << r.report.iterations << " iterations\n";
        return kNumeric;
    }
    return kOk;
}

int cmd_filter(const RunConfig& cfg) {
    const Loaded d = load_data(cfg);
    const StateSpaceModel model = load_model(cfg, d.y.n());
    require_gaussian(model, "filter");
    const FilterResult f = kalman_filter(d.y, model);
    const Index n = d.y.n();
    const fs::path out = cfg.out;
    io::write_csv(out / "a.csv", with_time(numbered("a", model.m())), f.a.leftCols(n), d.time);
    io::write_csv(out / "P_diag.csv", with_time(numbered("P", model.m())), diagonals(f.P, n), d.time);
    io::write_csv(out / "v.csv", with_time(d.names), f.v, d.time);
    io::write_csv(out / "F.csv", with_time(d.names), diagonals(f.F, n), d.time);
    json rep;
    rep["loglik"] = number_json(f.loglik);
    rep["diffuse_steps"] = f.d;
    write_json(out / "filter.json", rep);
    return kOk;
}

int cmd_smooth(const RunConfig& cfg) {
    const Loaded d = load_data(cfg);
    const StateSpaceModel model = load_model(cfg, d.y.n());
    const fs::path out = cfg.out;
    SmoothResult s;
    Matrix irregular;
    if (model.is_gaussian()) {
        s = smooth(d.y, model);
        irregular = s.epshat;
    } else {
        const GaussApproximation ga = gauss_approximate(d.y, model);
        s = smooth(ga.ytilde, ga.model);
        irregular = observations(d.y) - signal_rows(s.alphahat, model).colwise().sum();
        if (model.p() != 1) irregular = s.epshat;
    }
    io::write_csv(out / "alphahat.csv", with_time(numbered("alpha", model.m())), s.alphahat, d.time);
    io::write_csv(out / "V_diag.csv", with_time(numbered("V", model.m())), diagonals(s.V, d.y.n()), d.time);
    write_components(out / "components.csv", model, s.alphahat, d);
    io::write_csv(out / "irregular.csv", with_time(d.names), irregular, d.time);
    return kOk;
}

int cmd_forecast(const RunConfig& cfg) {
    if (cfg.horizon < 1) throw ArgumentError("forecast needs --horizon of at least 1");
    const Loaded d = load_data(cfg);
    const StateSpaceModel model = load_model(cfg, d.y.n());
    const Forecast f = forecast(d.y, model, cfg.horizon);
    const Index p = model.p();
    Matrix rows(4 * p, cfg.horizon);
    std::vector<std::string> header;
    for (Index i = 0; i < p; ++i) {
        const std::string sfx = p == 1 ? "" : "_" + d.names[static_cast<std::size_t>(i)];
        for (const char* c : {"point", "var", "lo50", "hi50"}) header.push_back(c + sfx);
        for (Index k = 0; k < cfg.horizon; ++k) {
            const double mean = f.mean(i, k);
            const double var = f.var[static_cast<std::size_t>(k)](i, i);
            const double half = 0.675 * std::sqrt(std::max(var, 0.0));
            rows(4 * i, k) = mean;
            rows(4 * i + 1, k) = var;
            rows(4 * i + 2, k) = mean - half;
            rows(4 * i + 3, k) = mean + half;
        }
    }
    io::write_csv(fs::path(cfg.out) / "forecast.csv", with_time(header), rows, future_time(d.time, cfg.horizon));
    return kOk;
}

std::string file_stem(std::string name) {
    for (char& ch : name)
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    return name;
}

int cmd_decompose(const RunConfig& cfg) {
    const Loaded d = load_data(cfg);
    if (d.y.p() != 1) throw DataError("decompose needs a single series");
    const StateSpaceModel model = load_model(cfg, d.y.n());
    const StateSpaceModel com = ssmhtd(model);
    const SmoothResult s = smooth(d.y, com);
    const std::vector<Matrix> sig = signal(s.alphahat, com);
    const fs::path out = cfg.out;
    Matrix seasadj = observations(d.y);
    std::size_t k = 0;
    for (const auto& c : com.components) {
        if (c.noise) continue;
        io::write_csv(out / ("component_" + file_stem(c.name) + ".csv"), {"t", c.name}, sig[k], d.time);
        if (c.name == "seasonal") seasadj -= sig[k];
        ++k;
    }
    io::write_csv(out / "component_irregular.csv", {"t", "irregular"}, s.epshat, d.time);
    io::write_csv(out / "seasadj.csv", {"t", "seasadj"}, seasadj, d.time);
    return kOk;
}

int cmd_select(const RunConfig& cfg) {
    const Loaded d = load_data(cfg);
    std::optional<int> s;
    if (cfg.period > 1) s = cfg.period;
    DiffDegree dd;
    if (cfg.diff >= 0 || cfg.sdiff >= 0) {
        dd.d = std::max(cfg.diff, 0);
        dd.D = s ? std::max(cfg.sdiff, 0) : 0;
        const TimeSeriesData z = difference(d.y, dd.d, dd.D, s.value_or(1));
        // thresholds above 1 never difference, leaving only the mean test
        dd.mean = diffdegree(z, std::nullopt, {2.0, 2.0}).mean;
    } else {
        dd = diffdegree(d.y, s);
    }
    if (cfg.mean == "true") dd.mean = true;
    else if (cfg.mean == "false") dd.mean = false;
    else if (cfg.mean != "auto") throw ArgumentError("--mean must be auto, true or false");
    for (const auto& msg : dd.diagnostics) std::cerr << msg << "\n";
    const TimeSeriesData z = difference(d.y, dd.d, dd.D, s.value_or(1));
    ArmaDegreeOptions o;
    o.s = s;
    o.mean = dd.mean;
    o.mr = cfg.max_order;
    o.ms = cfg.max_seasonal;
    o.fit = fit_options(cfg);
    const ArmaDegree ad = armadegree(z, o);
    for (const auto& msg : ad.diagnostics) std::cerr << msg << "\n";
    const fs::path out = cfg.out;
    json spec;
    spec["p"] = ad.p;
    spec["d"] = dd.d;
    spec["q"] = ad.q;
    spec["P"] = ad.P;
    spec["D"] = dd.D;
    spec["Q"] = ad.Q;
    spec["s"] = s.value_or(1);
    spec["mean"] = dd.mean;
    spec["bic"] = number_json(ad.bic);
    write_json(out / "spec.json", spec);
    std::string grid = "p,q,P,Q,bic,converged\n";
    for (const auto& c : ad.cells) {
        grid += std::to_string(c.p) + "," + std::to_string(c.q) + "," + std::to_string(c.P) + "," +
                std::to_string(c.Q) + "," + io::format_number(c.bic) + "," + (c.converged ? "1" : "0") + "\n";
    }
    io::write_atomic(out / "grid.csv", grid);
    return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.draws < 1) throw ArgumentError("simulate needs --draws of at least 1");
    Loaded d;
    Index n = cfg.length;
    if (!cfg.data.empty()) {
        d = load_data(cfg);
        if (n == 0) n = d.y.n();
    }
    if (n < 1) throw ArgumentError("simulate needs --length or --data");
    const StateSpaceModel model = load_model(cfg, n);
    SampleOptions so;
    so.seed = cfg.seed;
    const Samples smp = sample(model, n, cfg.draws, so);
    std::vector<std::string> names = d.names;
    if (static_cast<Index>(names.size()) != model.p()) names = numbered("y", model.p());
    std::vector<double> time = d.time;
    if (static_cast<Index>(time.size()) != n) time.clear();
    const int width = static_cast<int>(std::to_string(cfg.draws).size());
    for (Index k = 0; k < cfg.draws; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "replicate_%0*ld.csv", width, static_cast<long>(k + 1));
        io::write_csv(fs::path(cfg.out) / buf, with_time(names), smp.y[static_cast<std::size_t>(k)], time);
    }
    return kOk;
}

int dispatch(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "filter") return cmd_filter(cfg);
    if (cfg.command == "smooth") return cmd_smooth(cfg);
    if (cfg.command == "forecast") return cmd_forecast(cfg);
    if (cfg.command == "decompose") return cmd_decompose(cfg);
    if (cfg.command == "select") return cmd_select(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    throw ArgumentError("unknown command '" + cfg.command + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"State space time series analysis"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--data", cfg.data, "CSV file, one row per time point");
    app.add_option("--model", cfg.model, "JSON model spec");
    app.add_option("--out", cfg.out, "Output directory");
    app.add_option("--columns", cfg.columns, "Data columns to use")->delimiter(',');
    app.add_flag("--log", cfg.log, "Take logs of the data");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--fmin", cfg.fmin, "Minimizer: simplex or bfgs");
    app.add_option("--tol", cfg.tol, "Optimizer tolerance");
    app.add_option("--maxiter", cfg.maxiter, "Optimizer iteration limit");
    app.add_option("--disp", cfg.disp, "Display: off, notify, final or iter");
    app.add_option("--nsamp", cfg.nsamp, "Importance samples for non-Gaussian models");
    app.add_option("--horizon", cfg.horizon, "Forecast horizon");
    app.add_option("--draws", cfg.draws, "Number of simulated replicates");
    app.add_option("--length", cfg.length, "Length of simulated series");
    app.add_option("--period", cfg.period, "Seasonal period for select");
    app.add_option("--max-order", cfg.max_order, "Largest regular ARMA order for select");
    app.add_option("--max-seasonal", cfg.max_seasonal, "Largest seasonal ARMA order for select");
    app.add_option("--mean", cfg.mean, "Mean in select: auto, true or false");
    app.add_option("--diff", cfg.diff, "Regular differences for select, skipping detection");
    app.add_option("--sdiff", cfg.sdiff, "Seasonal differences for select, skipping detection");
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"fit", "Estimate parameters by maximum likelihood"},
        {"filter", "Kalman filter output"},
        {"smooth", "Smoothed states, components and irregular"},
        {"forecast", "Forecasts with 50% bands"},
        {"decompose", "Canonical ARIMA decomposition and seasonal adjustment"},
        {"select", "Automatic ARIMA order selection"},
        {"simulate", "Draws from the model"}};
    for (const auto& [name, desc] : commands) {
        app.add_subcommand(name, desc)->fallthrough()->callback([&cfg, name = std::string(name)] { cfg.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInternal;
    }
    try {
        return dispatch(cfg);
    } catch (const DataError& e) {
        std::cerr << "ssm " << cfg.command << ": data error: " << e.what() << "\n";
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "ssm " << cfg.command << ": numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        std::cerr << "ssm " << cfg.command << ": model error: " << e.what() << "\n";
        return kModel;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "ssm " << cfg.command << ": " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "ssm " << cfg.command << ": internal error: " << e.what() << "\n";
        return kInternal;
    }
}
