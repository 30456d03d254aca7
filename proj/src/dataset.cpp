#include "phenoclust/dataset.hpp"

#include "phenoclust/csv.hpp"
#include "phenoclust/error.hpp"
#include "phenoclust/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

namespace phenoclust {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::optional<double> parse_real(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

/// (level, count) sorted by descending count then ascending name.
std::vector<std::pair<std::string, std::size_t>> level_frequencies(const Dataset& data, std::size_t col) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!data.missing(i, col)) ++counts[data.levels[col][i]];
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return sorted;
}

void require_categorical(const Dataset& data, std::size_t col) {
    if (data.columns[col].kind != ColumnKind::Categorical) {
        throw DataError("type", "column '" + data.columns[col].name + "' is not categorical");
    }
}

void compute_moments(const Dataset& data, std::size_t col, ColumnMeta& meta) {
    const auto column = data.values.col(static_cast<Eigen::Index>(col));
    const auto m = column.size();
    const double lo = column.minCoeff();
    const double hi = column.maxCoeff();
    const double mean = column.mean();
    meta.mean = mean;
    if (lo == hi || m < 2) {
        meta.mean = lo;
        meta.variance = 0.0;
        return;
    }
    meta.variance = (column.array() - mean).square().sum() / static_cast<double>(m - 1);
}

Dataset select_columns(const Dataset& data, const std::vector<std::size_t>& keep) {
    Dataset out;
    out.row_ids = data.row_ids;
    const auto m = static_cast<Eigen::Index>(data.rows());
    const auto n = static_cast<Eigen::Index>(keep.size());
    out.values.resize(m, n);
    out.missing.resize(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto src = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]);
        out.values.col(j) = data.values.col(src);
        out.missing.col(j) = data.missing.col(src);
        out.columns.push_back(data.columns[static_cast<std::size_t>(src)]);
        out.levels.push_back(data.levels[static_cast<std::size_t>(src)]);
    }
    return out;
}

} // namespace

const char* to_string(ColumnKind kind) noexcept {
    switch (kind) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Categorical: return "categorical";
    }
    return "unknown";
}

ColumnKind parse_column_kind(std::string_view text) {
    if (iequals(text, "numeric")) return ColumnKind::Numeric;
    if (iequals(text, "binary")) return ColumnKind::Binary;
    if (iequals(text, "categorical")) return ColumnKind::Categorical;
    throw ConfigError("schema", "unknown column kind '" + std::string(text) + "'");
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name == name) return j;
    }
    return std::nullopt;
}

std::size_t Dataset::column_index(std::string_view name) const {
    if (auto j = find_column(name)) return *j;
    throw ConfigError("schema", "unknown column '" + std::string(name) + "'");
}

std::vector<std::size_t> Dataset::column_indices(std::span<const std::string> names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& name : names) out.push_back(column_index(name));
    return out;
}

Schema parse_schema(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("schema", "schema document must be an object");
    Schema schema;
    try {
        if (doc.contains("id") && !doc.at("id").is_null()) schema.id_column = doc.at("id").get<std::string>();
        if (doc.contains("max_categories")) schema.max_categories = doc.at("max_categories").get<int>();
        if (doc.contains("average_duplicates")) schema.average_duplicates = doc.at("average_duplicates").get<bool>();
        if (!doc.contains("columns") || !doc.at("columns").is_object()) {
            throw ConfigError("schema", "schema requires a 'columns' object");
        }
        for (const auto& [name, kind] : doc.at("columns").items()) {
            schema.columns.emplace_back(name, parse_column_kind(kind.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema", std::string("malformed schema: ") + e.what());
    }
    if (schema.max_categories < 2) throw ConfigError("schema", "max_categories must be at least 2");
    if (schema.average_duplicates && !schema.id_column) {
        throw ConfigError("schema", "average_duplicates requires an id column");
    }
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("schema", "cannot open schema file " + path.string());
    try {
        return parse_schema(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("schema", "schema is not valid JSON: " + std::string(e.what()));
    }
}

nlohmann::json to_json(const Schema& schema) {
    nlohmann::json doc;
    doc["id"] = schema.id_column ? nlohmann::json(*schema.id_column) : nlohmann::json(nullptr);
    doc["max_categories"] = schema.max_categories;
    doc["average_duplicates"] = schema.average_duplicates;
    doc["columns"] = nlohmann::json::object();
    for (const auto& [name, kind] : schema.columns) doc["columns"][name] = to_string(kind);
    return doc;
}

bool is_missing_token(std::string_view token) {
    token = trim(token);
    return token.empty() || iequals(token, "NA") || iequals(token, "NaN");
}

Dataset read_csv(std::istream& in, const Schema& schema) {
    const auto records = csv::parse(in);
    if (records.empty()) throw DataError("ingestion", "CSV has no header row");
    const auto& header = records.front();

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!position.emplace(header[c], c).second) {
            throw DataError("ingestion", "duplicate header column '" + header[c] + "'");
        }
    }

    std::map<std::string, ColumnKind> declared;
    for (const auto& [name, kind] : schema.columns) {
        if (!position.contains(name)) throw ConfigError("schema", "unknown column '" + name + "' in schema");
        declared[name] = kind;
    }
    std::optional<std::size_t> id_pos;
    if (schema.id_column) {
        auto it = position.find(*schema.id_column);
        if (it == position.end()) throw ConfigError("schema", "unknown id column '" + *schema.id_column + "'");
        id_pos = it->second;
    }

    // Columns in header order.
    std::vector<std::size_t> source;
    Dataset data;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = declared.find(header[c]);
        if (it == declared.end()) continue;
        source.push_back(c);
        ColumnMeta meta;
        meta.name = header[c];
        meta.kind = it->second;
        meta.origin = header[c];
        data.columns.push_back(std::move(meta));
    }

    const std::size_t m = records.size() - 1;
    const std::size_t n = source.size();
    data.values = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), kNaN);
    data.missing = MaskMatrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), false);
    data.levels.assign(n, {});
    for (std::size_t j = 0; j < n; ++j) {
        if (data.columns[j].kind == ColumnKind::Categorical) data.levels[j].assign(m, {});
    }
    data.row_ids.reserve(m);

    for (std::size_t r = 0; r < m; ++r) {
        const auto& record = records[r + 1];
        const std::string where = "data row " + std::to_string(r + 1);
        if (record.size() != header.size()) {
            throw DataError("ingestion", where + " has " + std::to_string(record.size()) + " fields, expected " +
                                             std::to_string(header.size()));
        }
        data.row_ids.push_back(id_pos ? std::string(trim(record[*id_pos])) : std::to_string(r + 1));
        const auto i = static_cast<Eigen::Index>(r);
        for (std::size_t j = 0; j < n; ++j) {
            const std::string& token = record[source[j]];
            const auto jj = static_cast<Eigen::Index>(j);
            if (is_missing_token(token)) {
                data.missing(i, jj) = true;
                continue;
            }
            const auto& meta = data.columns[j];
            if (meta.kind == ColumnKind::Categorical) {
                data.levels[j][r] = std::string(trim(token));
                continue;
            }
            const auto value = parse_real(token);
            if (!value) {
                throw DataError("ingestion", where + ", column '" + meta.name + "': non-numeric token '" + token + "'");
            }
            if (meta.kind == ColumnKind::Binary && *value != 0.0 && *value != 1.0) {
                throw DataError("ingestion", where + ", column '" + meta.name + "': binary value must be 0 or 1");
            }
            data.values(i, jj) = *value;
        }
    }

    if (!schema.average_duplicates) return data;

    // Group repeated row ids (first-appearance order); numeric cells are
    // averaged over non-missing records, other kinds take the first observed value.
    std::vector<std::string> ids;
    std::vector<std::vector<std::size_t>> groups;
    std::unordered_map<std::string, std::size_t> group_of;
    for (std::size_t r = 0; r < m; ++r) {
        auto [it, inserted] = group_of.emplace(data.row_ids[r], ids.size());
        if (inserted) {
            ids.push_back(data.row_ids[r]);
            groups.emplace_back();
        }
        groups[it->second].push_back(r);
    }
    Dataset merged;
    merged.columns = data.columns;
    merged.row_ids = ids;
    const auto g = static_cast<Eigen::Index>(ids.size());
    merged.values = Matrix::Constant(g, static_cast<Eigen::Index>(n), kNaN);
    merged.missing = MaskMatrix::Constant(g, static_cast<Eigen::Index>(n), true);
    merged.levels.assign(n, {});
    for (std::size_t j = 0; j < n; ++j) {
        if (data.columns[j].kind == ColumnKind::Categorical) merged.levels[j].assign(ids.size(), {});
    }
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto row = static_cast<Eigen::Index>(gi);
        for (std::size_t j = 0; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t r : groups[gi]) {
                const auto i = static_cast<Eigen::Index>(r);
                if (data.missing(i, jj)) continue;
                if (data.columns[j].kind == ColumnKind::Numeric) {
                    sum += data.values(i, jj);
                    ++count;
                } else if (count == 0) {
                    merged.values(row, jj) = data.values(i, jj);
                    if (data.columns[j].kind == ColumnKind::Categorical) merged.levels[j][gi] = data.levels[j][r];
                    count = 1;
                }
            }
            if (count == 0) continue;
            merged.missing(row, jj) = false;
            if (data.columns[j].kind == ColumnKind::Numeric) merged.values(row, jj) = sum / static_cast<double>(count);
        }
    }
    if (merged.rows() != data.rows()) {
        log::info("duplicates_averaged", {{"records", data.rows()}, {"rows", merged.rows()}});
    }
    return merged;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("ingestion", "cannot open " + path.string());
    return read_csv(in, schema);
}

Dataset consolidate_categories(Dataset data, std::string_view column, int max_categories) {
    if (max_categories < 2) throw ConfigError("parameter", "max_categories must be at least 2");
    const std::size_t col = data.column_index(column);
    require_categorical(data, col);

    const auto freq = level_frequencies(data, col);
    if (freq.size() <= static_cast<std::size_t>(max_categories)) return data;

    std::vector<std::string> kept;
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(max_categories); ++i) kept.push_back(freq[i].first);
    std::size_t merged = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (data.missing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col))) continue;
        auto& level = data.levels[col][i];
        if (std::find(kept.begin(), kept.end(), level) == kept.end()) {
            level = "other";
            ++merged;
        }
    }
    log::info("categories_consolidated",
              {{"column", data.columns[col].name}, {"levels", freq.size()}, {"merged_rows", merged}});
    return data;
}

Dataset dummy_encode(Dataset data) {
    Dataset out;
    out.row_ids = data.row_ids;
    const auto m = static_cast<Eigen::Index>(data.rows());

    std::vector<Vector> value_cols;
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, 1>> mask_cols;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const auto& meta = data.columns[j];
        if (meta.kind != ColumnKind::Categorical) {
            out.columns.push_back(meta);
            out.levels.emplace_back();
            value_cols.emplace_back(data.values.col(jj));
            mask_cols.emplace_back(data.missing.col(jj));
            continue;
        }
        const auto freq = level_frequencies(data, j);
        // freq[0] is the reference level.
        for (std::size_t l = 1; l < freq.size(); ++l) {
            ColumnMeta dummy;
            dummy.name = meta.name + "=" + freq[l].first;
            dummy.kind = ColumnKind::Binary;
            dummy.origin = meta.name;
            Vector v(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                v(i) = data.missing(i, jj) ? kNaN : (data.levels[j][static_cast<std::size_t>(i)] == freq[l].first ? 1.0 : 0.0);
            }
            out.columns.push_back(std::move(dummy));
            out.levels.emplace_back();
            value_cols.push_back(std::move(v));
            mask_cols.emplace_back(data.missing.col(jj));
        }
    }
    out.values.resize(m, static_cast<Eigen::Index>(value_cols.size()));
    out.missing.resize(m, static_cast<Eigen::Index>(value_cols.size()));
    for (std::size_t j = 0; j < value_cols.size(); ++j) {
        out.values.col(static_cast<Eigen::Index>(j)) = value_cols[j];
        out.missing.col(static_cast<Eigen::Index>(j)) = mask_cols[j];
    }
    return out;
}

Dataset drop_incomplete_rows(Dataset data) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!data.missing.row(static_cast<Eigen::Index>(i)).any()) keep.push_back(i);
    }
    if (keep.empty()) throw DataError("empty-dataset", "every row has at least one missing value");
    if (keep.size() == data.rows()) return data;

    Dataset out;
    out.columns = data.columns;
    const auto m = static_cast<Eigen::Index>(keep.size());
    const auto n = static_cast<Eigen::Index>(data.cols());
    out.values.resize(m, n);
    out.missing = MaskMatrix::Constant(m, n, false);
    out.levels.assign(data.cols(), {});
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.row_ids.push_back(data.row_ids[keep[r]]);
        out.values.row(static_cast<Eigen::Index>(r)) = data.values.row(static_cast<Eigen::Index>(keep[r]));
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.levels[j].empty()) continue;
        for (std::size_t r : keep) out.levels[j].push_back(data.levels[j][r]);
    }
    return out;
}

Dataset finalize(Dataset data) {
    if (data.rows() < 2) throw DataError("insufficient-data", "at least two complete rows are required");
    if (data.missing.any()) throw DataError("ingestion", "finalize requires complete rows");

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        auto& meta = data.columns[j];
        if (meta.kind == ColumnKind::Categorical) {
            throw DataError("type", "column '" + meta.name + "' must be dummy coded before finalize");
        }
        const auto column = data.values.col(static_cast<Eigen::Index>(j));
        if (meta.kind == ColumnKind::Binary && ((column.array() != 0.0) && (column.array() != 1.0)).any()) {
            throw DataError("type", "binary column '" + meta.name + "' has values outside {0, 1}");
        }
        meta.min = column.minCoeff();
        meta.max = column.maxCoeff();
        meta.range = meta.max - meta.min;
        compute_moments(data, j, meta);
        if (meta.variance > 0.0) {
            keep.push_back(j);
        } else {
            log::warn("column_dropped", {{"column", meta.name}, {"reason", "zero variance"}});
        }
    }
    if (keep.empty()) throw DataError("empty-dataset", "no column has nonzero variance");
    if (keep.size() == data.cols()) return data;
    return select_columns(data, keep);
}

void refresh_moments(Dataset& data) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.columns[j].kind != ColumnKind::Categorical) compute_moments(data, j, data.columns[j]);
    }
}

Dataset subset_rows(const Dataset& data, std::span<const std::size_t> rows) {
    Dataset out;
    out.columns = data.columns;
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto n = static_cast<Eigen::Index>(data.cols());
    out.values.resize(m, n);
    out.missing.resize(m, n);
    out.levels.assign(data.cols(), {});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= data.rows()) throw ConfigError("parameter", "row index out of range");
        out.row_ids.push_back(data.row_ids[rows[r]]);
        out.values.row(static_cast<Eigen::Index>(r)) = data.values.row(static_cast<Eigen::Index>(rows[r]));
        out.missing.row(static_cast<Eigen::Index>(r)) = data.missing.row(static_cast<Eigen::Index>(rows[r]));
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.levels[j].empty()) continue;
        for (std::size_t r : rows) out.levels[j].push_back(data.levels[j][r]);
    }
    if (!out.missing.any() && m > 0) refresh_moments(out);
    return out;
}

Dataset with_column_values(const Dataset& data, std::size_t column, const Vector& values) {
    if (column >= data.cols() || values.size() != static_cast<Eigen::Index>(data.rows())) {
        throw DataError("shape", "replacement column does not match dataset shape");
    }
    Dataset out = data;
    out.values.col(static_cast<Eigen::Index>(column)) = values;
    compute_moments(out, column, out.columns[column]);
    return out;
}

Preprocessed preprocess(Dataset raw, int max_categories) {
    PreprocessReport report;
    report.input_rows = raw.rows();
    report.input_columns = raw.cols();

    for (std::size_t j = 0; j < raw.cols(); ++j) {
        if (raw.columns[j].kind == ColumnKind::Categorical) {
            const std::string name = raw.columns[j].name;
            raw = consolidate_categories(std::move(raw), name, max_categories);
        }
    }
    Dataset encoded = dummy_encode(std::move(raw));

    std::vector<std::string> before_rows = encoded.row_ids;
    Dataset complete = drop_incomplete_rows(std::move(encoded));
    {
        std::size_t k = 0;
        for (const auto& id : before_rows) {
            if (k < complete.rows() && complete.row_ids[k] == id) {
                ++k;
            } else {
                report.dropped_rows.push_back(id);
            }
        }
    }
    if (!report.dropped_rows.empty()) {
        log::info("rows_dropped", {{"count", report.dropped_rows.size()}, {"remaining", complete.rows()}});
    }

    std::vector<std::string> before_cols;
    for (const auto& c : complete.columns) before_cols.push_back(c.name);
    Dataset final_data = finalize(std::move(complete));
    for (const auto& name : before_cols) {
        if (!final_data.find_column(name)) report.dropped_columns.push_back(name);
    }
    return {std::move(final_data), std::move(report)};
}

std::string format_real(double value) {
    if (std::isnan(value)) return "";
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

void write_csv(std::ostream& out, const Dataset& data) {
    csv::Record header{"row_id"};
    for (const auto& c : data.columns) header.push_back(c.name);
    csv::write_record(out, header);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        csv::Record record{data.row_ids[i]};
        for (std::size_t j = 0; j < data.cols(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            if (data.missing(ii, jj)) {
                record.emplace_back();
            } else if (data.columns[j].kind == ColumnKind::Categorical) {
                record.push_back(data.levels[j][i]);
            } else {
                record.push_back(format_real(data.values(ii, jj)));
            }
        }
        csv::write_record(out, record);
    }
}

Schema schema_of(const Dataset& data) {
    Schema schema;
    schema.id_column = "row_id";
    for (const auto& c : data.columns) schema.columns.emplace_back(c.name, c.kind);
    return schema;
}

void write_column_report(std::ostream& out, const Dataset& data, const PreprocessReport& report) {
    csv::write_record(out, {"column", "kind", "origin", "mean", "variance", "min", "max", "range", "status"});
    for (const auto& c : data.columns) {
        csv::write_record(out, {c.name, to_string(c.kind), c.origin, format_real(c.mean), format_real(c.variance),
                                format_real(c.min), format_real(c.max), format_real(c.range), "kept"});
    }
    for (const auto& name : report.dropped_columns) {
        csv::write_record(out, {name, "", "", "", "0", "", "", "", "dropped: zero variance"});
    }
}

} // namespace phenoclust
