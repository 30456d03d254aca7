#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phenoclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Categorical columns exist only before dummy coding; a finalized dataset
/// holds Numeric and Binary columns exclusively.
enum class ColumnKind { Numeric, Binary, Categorical };

const char* to_string(ColumnKind kind) noexcept;
ColumnKind parse_column_kind(std::string_view text);

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::string origin; // source feature before dummy coding
    double mean = 0.0;
    double variance = 0.0; // sample variance, m - 1 denominator
    double min = 0.0;
    double max = 0.0;
    double range = 0.0; // max - min, the Gower normalizer
};

/// Tabular data with per-column metadata. Categorical cells live in `levels`
/// (one string per row) and hold NaN in `values`.
struct Dataset {
    std::vector<std::string> row_ids;
    std::vector<ColumnMeta> columns;
    Matrix values;
    MaskMatrix missing;
    std::vector<std::vector<std::string>> levels;

    std::size_t rows() const noexcept { return row_ids.size(); }
    std::size_t cols() const noexcept { return columns.size(); }

    std::optional<std::size_t> find_column(std::string_view name) const;
    /// Throws ConfigError("schema") if absent.
    std::size_t column_index(std::string_view name) const;
    std::vector<std::size_t> column_indices(std::span<const std::string> names) const;
};

struct Schema {
    std::optional<std::string> id_column;
    std::vector<std::pair<std::string, ColumnKind>> columns;
    int max_categories = 3;
    /// Collapse repeated row ids into one row, averaging numeric cells.
    bool average_duplicates = false;
};

/// Schema documents are JSON:
/// `{"id": "pid", "columns": {"hr": "numeric", "sex": "categorical"}, "max_categories": 3, "average_duplicates": false}`
Schema parse_schema(const nlohmann::json& doc);
Schema load_schema(const std::filesystem::path& path);
nlohmann::json to_json(const Schema& schema);

/// Missing tokens: empty, "NA", "NaN" (case-insensitive, surrounding blanks ignored).
bool is_missing_token(std::string_view token);

Dataset read_csv(std::istream& in, const Schema& schema);
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);

/// Keeps the (max_categories - 1) most frequent levels and merges the rest into
/// "other". Ties in frequency go to the lexicographically smaller level.
Dataset consolidate_categories(Dataset data, std::string_view column, int max_categories = 3);

/// Replaces every categorical column with L - 1 binary indicators named
/// "col=level"; the most frequent level is the reference and gets no column.
Dataset dummy_encode(Dataset data);

Dataset drop_incomplete_rows(Dataset data);

/// Computes column statistics and removes zero-variance columns (logged).
Dataset finalize(Dataset data);

/// Recomputes mean and variance of every column from `data.values`.
/// min, max and range are left alone.
void refresh_moments(Dataset& data);

/// Row subset. Moments are recomputed on the subset; min/max/range stay those
/// of the parent so Gower distances remain on the global scale.
Dataset subset_rows(const Dataset& data, std::span<const std::size_t> rows);

/// Copy with one column's values replaced (moments refreshed for that column).
Dataset with_column_values(const Dataset& data, std::size_t column, const Vector& values);

struct PreprocessReport {
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_columns;
    std::size_t input_rows = 0;
    std::size_t input_columns = 0;
};

struct Preprocessed {
    Dataset data;
    PreprocessReport report;
};

/// consolidate every categorical column, dummy code, drop incomplete rows, finalize.
Preprocessed preprocess(Dataset raw, int max_categories = 3);

/// Finalized data as CSV: a row_id column followed by every column.
void write_csv(std::ostream& out, const Dataset& data);

/// Schema describing a finalized dataset so it can be reloaded as-is.
Schema schema_of(const Dataset& data);

/// One row per column: name, kind, origin, mean, variance, min, max, range.
void write_column_report(std::ostream& out, const Dataset& data, const PreprocessReport& report);

/// Formats a double with 17 significant digits.
std::string format_real(double value);

} // namespace phenoclust
