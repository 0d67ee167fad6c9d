#include "ssm/io.hpp"

#include "ssm/catalog.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace ssm::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Eigen::Index;

std::size_t CsvTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError("csv: no column named '" + name + "'");
}

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else {
            cell += ch;
        }
    }
    if (quoted) throw DataError("csv: unterminated quote on line " + std::to_string(lineno));
    out.push_back(cell);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t lineno) {
    const std::string s = trim(raw);
    if (s.empty() || s == "NA" || s == "NaN" || s == "nan") return kNaN;
    if (s == "inf" || s == "Inf") return kInf;
    if (s == "-inf" || s == "-Inf") return -kInf;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("csv: cannot parse '" + s + "' on line " + std::to_string(lineno));
    return v;
}

bool is_time_column(const std::string& name) {
    return name == "t" || name == "time" || name == "Time";
}

} // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_record(line, lineno);
        if (!have_header) {
            for (auto& c : cells) out.header.push_back(trim(c));
            out.columns.assign(out.header.size(), {});
            have_header = true;
            continue;
        }
        if (cells.size() != out.header.size())
            throw DataError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(out.header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) out.columns[j].push_back(parse_cell(cells[j], lineno));
    }
    if (!have_header) throw DataError("csv: no header row");
    return out;
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

TimeSeriesData series_from_table(const CsvTable& table, const std::vector<std::string>& names, bool log) {
    std::vector<std::size_t> cols;
    if (names.empty()) {
        for (std::size_t j = 0; j < table.header.size(); ++j)
            if (!(j == 0 && is_time_column(table.header[j]))) cols.push_back(j);
    } else {
        for (const auto& nm : names) cols.push_back(table.find(nm));
    }
    if (cols.empty()) throw DataError("csv: no data columns");
    const auto n = static_cast<Index>(table.rows());
    if (n == 0) throw DataError("csv: no data rows");
    Matrix y(static_cast<Index>(cols.size()), n);
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (Index t = 0; t < n; ++t) {
            double v = table.columns[cols[i]][static_cast<std::size_t>(t)];
            if (log && !std::isnan(v)) {
                if (!(v > 0.0)) throw DataError("csv: cannot take the log of " + format_number(v));
                v = std::log(v);
            }
            y(static_cast<Index>(i), t) = v;
        }
    const BoolMatrix miss = y.array().isNaN();
    if (!y.array().isNaN().select(0.0, y).allFinite()) throw DataError("csv: infinite observation");
    return TimeSeriesData(y.array().isNaN().select(0.0, y), miss);
}

std::string format_number(double v) {
    if (std::isnan(v)) return {};
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw NumericError("format_number: conversion failed");
    return std::string(buf, ptr);
}

void write_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write '" + tmp.string() + "'");
        f << text;
        f.flush();
        if (!f) throw DataError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& rows,
               const std::vector<double>& time) {
    if (static_cast<Index>(header.size()) != rows.rows() + 1)
        throw ArgumentError("write_csv: header must name the time column and every row");
    if (!time.empty() && static_cast<Index>(time.size()) != rows.cols())
        throw ArgumentError("write_csv: time column length differs from the data");
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out += ',';
        const bool quote = header[j].find_first_of(",\"") != std::string::npos;
        if (quote) {
            out += '"';
            for (char ch : header[j]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            out += '"';
        } else {
            out += header[j];
        }
    }
    out += '\n';
    for (Index t = 0; t < rows.cols(); ++t) {
        out += time.empty() ? std::to_string(t + 1) : format_number(time[static_cast<std::size_t>(t)]);
        for (Index i = 0; i < rows.rows(); ++i) {
            out += ',';
            out += format_number(rows(i, t));
        }
        out += '\n';
    }
    write_atomic(path, out);
}

// ---------------------------------------------------------------- JSON model specs

namespace {

double json_number(const json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return kNaN;
    }
    throw ArgumentError("model spec: '" + what + "' must be a number");
}

Index json_int(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ArgumentError("model spec: '" + what + "' must be an integer");
    return j.get<Index>();
}

bool json_bool(const json& j, const std::string& what) {
    if (!j.is_boolean()) throw ArgumentError("model spec: '" + what + "' must be true or false");
    return j.get<bool>();
}

std::string json_string(const json& j, const std::string& what) {
    if (!j.is_string()) throw ArgumentError("model spec: '" + what + "' must be a string");
    return j.get<std::string>();
}

Vector json_vector(const json& j, const std::string& what) {
    if (j.is_number() || j.is_string()) return Vector::Constant(1, json_number(j, what));
    if (!j.is_array()) throw ArgumentError("model spec: '" + what + "' must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = json_number(j[i], what);
    return v;
}

/// An array of rows; a flat array is one row.
Matrix json_matrix(const json& j, const std::string& what) {
    if (!j.is_array()) throw ArgumentError("model spec: '" + what + "' must be an array");
    if (j.empty()) return Matrix(0, 0);
    if (!j.front().is_array()) return json_vector(j, what).transpose();
    const auto rows = static_cast<Index>(j.size());
    const auto cols = static_cast<Index>(j.front().size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw ArgumentError("model spec: '" + what + "' rows differ in length");
        for (Index k = 0; k < cols; ++k) m(i, k) = json_number(row[static_cast<std::size_t>(k)], what);
    }
    return m;
}

std::vector<std::string> json_strings(const json& j, const std::string& what) {
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array()) throw ArgumentError("model spec: '" + what + "' must be a string or array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) out.push_back(json_string(e, what));
    return out;
}

Matrix regressors_from_file(const json& comp, const fs::path& base_dir) {
    fs::path path = json_string(comp["x"], "x");
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    const CsvTable table = read_csv(path);
    std::vector<std::string> cols;
    if (comp.contains("column")) cols = json_strings(comp["column"], "column");
    if (comp.contains("columns")) cols = json_strings(comp["columns"], "columns");
    const bool log = comp.contains("log") && json_bool(comp["log"], "log");
    const TimeSeriesData x = series_from_table(table, cols, log);
    if (x.any_missing()) throw DataError("regressor file '" + path.string() + "' has missing values");
    return x.values();
}

const std::set<std::string> kComponentKeys = {
    "code", "p", "d", "q", "P", "D", "Q", "s", "n", "h", "mean", "cycle", "cov", "type", "subtype", "types",
    "lvl", "tau", "x", "column", "columns", "log", "name", "names", "dep", "A", "a", "k", "nu", "delta",
    "phi", "theta", "ksivar"};

StateSpaceModel component_from_json(const json& comp, const fs::path& base_dir, Index default_n) {
    if (!comp.is_object()) throw ArgumentError("model spec: each component must be an object");
    if (!comp.contains("code")) throw ArgumentError("model spec: component without a 'code'");
    for (const auto& [key, value] : comp.items())
        if (!kComponentKeys.count(key)) throw ArgumentError("model spec: unknown component key '" + key + "'");
    const std::string code = json_string(comp["code"], "code");

    CatalogArgs a;
    const auto opt_int = [&](const char* key, std::optional<Index>& dst) {
        if (comp.contains(key)) dst = json_int(comp[key], key);
    };
    opt_int("p", a.p);
    opt_int("d", a.d);
    opt_int("q", a.q);
    opt_int("P", a.P);
    opt_int("D", a.D);
    opt_int("Q", a.Q);
    opt_int("s", a.s);
    opt_int("n", a.n);
    opt_int("h", a.h);
    if (!a.n && default_n > 0) a.n = default_n;
    if (comp.contains("mean")) a.mean = json_bool(comp["mean"], "mean");
    if (comp.contains("cycle")) a.cycle = json_bool(comp["cycle"], "cycle");
    if (comp.contains("cov")) {
        BoolVector flags;
        const json& c = comp["cov"];
        if (c.is_boolean()) {
            flags.push_back(c.get<bool>());
        } else if (c.is_array()) {
            for (const auto& e : c) flags.push_back(json_bool(e, "cov"));
        } else {
            throw ArgumentError("model spec: 'cov' must be a boolean or array of booleans");
        }
        a.cov = flags;
    }
    if (comp.contains("type")) a.type = json_string(comp["type"], "type");
    if (comp.contains("subtype")) a.type = json_string(comp["subtype"], "subtype");
    if (comp.contains("types")) a.types = json_strings(comp["types"], "types");
    if (comp.contains("lvl")) a.lvl = json_string(comp["lvl"], "lvl");
    if (comp.contains("tau")) {
        const json& t = comp["tau"];
        if (t.is_array()) {
            for (const auto& e : t) a.tau.push_back(json_int(e, "tau"));
        } else {
            a.tau.push_back(json_int(t, "tau"));
        }
    }
    if (comp.contains("x")) a.x = comp["x"].is_string() ? regressors_from_file(comp, base_dir) : json_matrix(comp["x"], "x");
    if (comp.contains("name")) a.names = json_strings(comp["name"], "name");
    if (comp.contains("names")) a.names = json_strings(comp["names"], "names");
    if (comp.contains("dep")) {
        const Matrix dm = json_matrix(comp["dep"], "dep");
        a.dep = (dm.array() != 0.0);
    }
    if (comp.contains("A")) a.A = json_matrix(comp["A"], "A");
    if (comp.contains("a")) a.a = json_vector(comp["a"], "a");
    if (comp.contains("k")) a.k = json_vector(comp["k"], "k");
    if (comp.contains("nu")) a.nu = json_number(comp["nu"], "nu");
    if (comp.contains("delta")) a.delta = json_vector(comp["delta"], "delta");
    const auto poly_list = [&](const char* key, std::vector<Vector>& dst) {
        if (!comp.contains(key)) return;
        const json& j = comp[key];
        if (!j.is_array()) throw ArgumentError(std::string("model spec: '") + key + "' must be an array");
        for (const auto& e : j) dst.push_back(e.is_array() ? json_vector(e, key) : Vector::Constant(1, json_number(e, key)));
    };
    if (code == "arimacom") {
        poly_list("phi", a.phi);
        poly_list("theta", a.theta);
    } else if (comp.contains("phi") || comp.contains("theta")) {
        throw ArgumentError("model spec: 'phi' and 'theta' apply to arimacom only");
    }
    if (comp.contains("ksivar")) a.ksivar = json_vector(comp["ksivar"], "ksivar");
    return predefined(code, a);
}

} // namespace

StateSpaceModel model_from_json(const std::string& text, const fs::path& base_dir, Index default_n) {
    json spec;
    try {
        spec = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("model spec: invalid JSON: ") + e.what());
    }
    if (!spec.is_object()) throw ArgumentError("model spec: top level must be an object");
    static const std::set<std::string> top = {"name", "noise", "components", "param", "param_names", "matrices"};
    for (const auto& [key, value] : spec.items())
        if (!top.count(key)) throw ArgumentError("model spec: unknown key '" + key + "'");
    if (!spec.contains("components") || !spec["components"].is_array() || spec["components"].empty())
        throw ArgumentError("model spec: 'components' must be a non-empty array");

    std::vector<StateSpaceModel> parts;
    if (spec.contains("noise")) parts.push_back(component_from_json(spec["noise"], base_dir, default_n));
    for (const auto& c : spec["components"]) parts.push_back(component_from_json(c, base_dir, default_n));
    StateSpaceModel model = parts.size() == 1 ? std::move(parts.front()) : combine_additive(parts);
    if (spec.contains("name")) model.name = json_string(spec["name"], "name");
    if (spec.contains("param")) {
        const Vector v = json_vector(spec["param"], "param");
        if (v.size() != model.w())
            throw ArgumentError("model spec: 'param' has " + std::to_string(v.size()) + " values, the model has " +
                                std::to_string(model.w()));
        model.set_param(v);
    }
    return model;
}

namespace {

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < m.cols(); ++k) {
            const double v = m(i, k);
            if (std::isnan(v)) row.push_back("nan");
            else if (std::isinf(v)) row.push_back(v > 0 ? "inf" : "-inf");
            else row.push_back(v);
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

std::string model_to_json(const std::string& spec_text, const StateSpaceModel& model, const fs::path& base_dir) {
    json spec;
    try {
        spec = json::parse(spec_text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("model spec: invalid JSON: ") + e.what());
    }
    const auto absolute_x = [&](json& comp) {
        if (comp.is_object() && comp.contains("x") && comp["x"].is_string()) {
            fs::path x = comp["x"].get<std::string>();
            if (x.is_relative() && !base_dir.empty()) comp["x"] = fs::weakly_canonical(base_dir / x).string();
        }
    };
    if (spec.contains("noise")) absolute_x(spec["noise"]);
    if (spec.contains("components") && spec["components"].is_array())
        for (auto& c : spec["components"]) absolute_x(c);
    json values = json::array();
    for (Index i = 0; i < model.w(); ++i) values.push_back(model.params.values()(i));
    spec["param"] = values;
    spec["param_names"] = model.params.names();
    json mats;
    mats["H"] = matrix_json(model.H.mat());
    mats["Z"] = matrix_json(model.Z.mat());
    mats["T"] = matrix_json(model.T.mat());
    mats["R"] = matrix_json(model.R.mat());
    mats["Q"] = matrix_json(model.Q.mat());
    mats["c"] = matrix_json(model.c.mat());
    mats["a1"] = matrix_json(model.a1.mat());
    mats["P1"] = matrix_json(model.P1.mat());
    spec["matrices"] = mats;
    return spec.dump(2) + "\n";
}

} // namespace ssm::io
