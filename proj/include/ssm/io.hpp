#pragma once

#include "ssm/model.hpp"
#include "ssm/time_series.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ssm::io {

/// Rows are time points, columns are series. An empty cell is a missing value.
struct CsvTable {
    std::vector<std::string> header;
    /// One inner vector per column; NaN for empty cells.
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    /// Index of a named column; throws DataError when absent.
    [[nodiscard]] std::size_t find(const std::string& name) const;
};

/// Throws DataError on unreadable files, ragged rows or unparsable cells.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] CsvTable parse_csv(const std::string& text);

/// The named columns (or, when `names` is empty, every column except a leading "t" or "time")
/// as a p x n series. With `log` every observed value is replaced by its logarithm.
[[nodiscard]] TimeSeriesData series_from_table(const CsvTable& table, const std::vector<std::string>& names = {},
                                               bool log = false);

/// Shortest decimal string that reads back to the same double; "" for NaN, "inf"/"-inf" otherwise.
[[nodiscard]] std::string format_number(double v);

/// Writes a header and one row per column of `rows` (p x n), with a leading time column 1..n.
/// NaN becomes an empty cell. The file is written to a temporary and renamed into place.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& rows,
               const std::vector<double>& time = {});

/// Writes text to a temporary next to `path` and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& text);

/// Reads a whole text file; throws DataError when it cannot be opened.
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

/// Builds a model from its JSON spec. Relative regressor paths resolve against `base_dir`;
/// `default_n` fills "n" for components that need a length and do not give one.
/// Throws ArgumentError for malformed specs.
[[nodiscard]] StateSpaceModel model_from_json(const std::string& text, const std::filesystem::path& base_dir = {},
                                              Eigen::Index default_n = 0);

/// The spec with "param" replaced by the model's current values, plus "param_names" and the
/// stationary system matrices under "matrices" (+inf written as "inf"). Relative regressor
/// paths are made absolute against `base_dir`.
[[nodiscard]] std::string model_to_json(const std::string& spec_text, const StateSpaceModel& model,
                                        const std::filesystem::path& base_dir = {});

} // namespace ssm::io
