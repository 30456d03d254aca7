#include "phenoclust/dissimilarity.hpp"

#include "phenoclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace phenoclust {
namespace {

struct Block {
    std::vector<std::size_t> features; // ascending
    std::vector<double> weights;
    std::vector<double> ranges;
    std::vector<bool> binary;
};

Block make_block(const Dataset& data, std::span<const std::size_t> features, const FeatureWeights& weights) {
    if (features.empty()) throw ConfigError("configuration", "Gower dissimilarity needs at least one feature");
    Block block;
    block.features.assign(features.begin(), features.end());
    std::sort(block.features.begin(), block.features.end());
    if (std::adjacent_find(block.features.begin(), block.features.end()) != block.features.end()) {
        throw ConfigError("configuration", "duplicate feature in Gower feature set");
    }
    for (std::size_t f : block.features) {
        if (f >= data.cols()) throw ConfigError("configuration", "feature index out of range");
        const auto& meta = data.columns[f];
        if (meta.kind == ColumnKind::Categorical) {
            throw DataError("type", "column '" + meta.name + "' must be dummy coded");
        }
        const bool binary = meta.kind == ColumnKind::Binary;
        if (!binary && !(meta.range > 0.0)) {
            throw ConfigError("configuration", "numeric column '" + meta.name + "' has zero range");
        }
        const double w = weights.weight_of(f);
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("configuration", "feature weights must be positive");
        block.weights.push_back(w);
        block.ranges.push_back(meta.range);
        block.binary.push_back(binary);
    }
    return block;
}

} // namespace

DissimilarityMatrix DissimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    DissimilarityMatrix d(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw DataError("shape", "dissimilarity matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const double v = rows[i][j];
            if (!(v >= 0.0 && v <= 1.0)) throw DataError("shape", "dissimilarities must lie in [0, 1]");
            if (i == j && v != 0.0) throw DataError("shape", "dissimilarity diagonal must be zero");
            if (v != rows[j][i]) throw DataError("shape", "dissimilarity matrix must be symmetric");
            d.values_[i * d.size_ + j] = v;
        }
    }
    return d;
}

DissimilarityMatrix DissimilarityMatrix::subset(std::span<const std::size_t> rows) const {
    DissimilarityMatrix out(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows.size(); ++b) out.values_[a * rows.size() + b] = (*this)(rows[a], rows[b]);
    }
    return out;
}

FeatureWeights FeatureWeights::uniform(std::span<const std::size_t> features) {
    return {std::vector<std::size_t>(features.begin(), features.end()), std::vector<double>(features.size(), 1.0)};
}

double FeatureWeights::weight_of(std::size_t feature) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i] == feature) return weights[i];
    }
    throw ConfigError("configuration", "no weight for feature " + std::to_string(feature));
}

double gower_pair(std::span<const double> row_a, std::span<const double> row_b, std::span<const ColumnMeta> metas,
                  std::span<const double> weights) {
    if (row_a.size() != row_b.size() || row_a.size() != metas.size() || weights.size() != metas.size()) {
        throw DataError("shape", "Gower inputs must have equal lengths");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t f = 0; f < metas.size(); ++f) {
        double d = 0.0;
        if (metas[f].kind == ColumnKind::Binary) {
            d = row_a[f] != row_b[f] ? 1.0 : 0.0;
        } else {
            if (!(metas[f].range > 0.0)) {
                throw ConfigError("configuration", "numeric column '" + metas[f].name + "' has zero range");
            }
            d = std::abs(row_a[f] - row_b[f]) / metas[f].range;
        }
        num += weights[f] * d;
        den += weights[f];
    }
    if (!(den > 0.0)) throw ConfigError("configuration", "Gower weights sum to zero");
    return std::min(1.0, num / den);
}

FeatureWeights balanced_weights(const Dataset& data, std::span<const std::size_t> features) {
    FeatureWeights out = FeatureWeights::uniform(features);
    std::vector<std::size_t> numeric;
    std::vector<std::size_t> binary;
    for (std::size_t f : features) {
        if (f >= data.cols()) throw ConfigError("configuration", "feature index out of range");
        (data.columns[f].kind == ColumnKind::Binary ? binary : numeric).push_back(f);
    }
    if (numeric.empty() || binary.empty()) return out;

    const auto m = static_cast<Eigen::Index>(data.rows());
    // Mean over all pairs of |a - b| for a column equals, after sorting,
    // sum_k (2k - m + 1) v_(k) / C(m, 2); exact and O(m log m).
    auto mean_abs_diff = [&](std::size_t f) {
        std::vector<double> v(data.values.col(static_cast<Eigen::Index>(f)).begin(),
                              data.values.col(static_cast<Eigen::Index>(f)).end());
        std::sort(v.begin(), v.end());
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) acc += (2.0 * static_cast<double>(k) - static_cast<double>(m) + 1.0) * v[static_cast<std::size_t>(k)];
        return acc / (0.5 * static_cast<double>(m) * static_cast<double>(m - 1));
    };

    double numeric_mean = 0.0;
    for (std::size_t f : numeric) numeric_mean += mean_abs_diff(f) / data.columns[f].range;
    numeric_mean /= static_cast<double>(numeric.size());
    double binary_mean = 0.0;
    for (std::size_t f : binary) binary_mean += mean_abs_diff(f);
    binary_mean /= static_cast<double>(binary.size());

    if (!(binary_mean > 0.0)) return out;
    const double w = numeric_mean / binary_mean;
    if (!(w > 0.0) || !std::isfinite(w)) return out;
    for (std::size_t i = 0; i < out.features.size(); ++i) {
        if (data.columns[out.features[i]].kind == ColumnKind::Binary) out.weights[i] = w;
    }
    return out;
}

DissimilarityMatrix gower_matrix(const Dataset& data, std::span<const std::size_t> features,
                                 const FeatureWeights& weights) {
    const std::size_t m = data.rows();
    if (m < 2) throw DataError("insufficient-data", "at least two rows are required");
    if (data.missing.any()) throw DataError("ingestion", "Gower dissimilarity requires complete data");
    const Block block = make_block(data, features, weights);
    const std::size_t nf = block.features.size();

    // Row-major copy of the feature block for cache-friendly pair loops.
    std::vector<double> rows(m * nf);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t f = 0; f < nf; ++f) {
            rows[i * nf + f] = data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(block.features[f]));
        }
    }
    std::vector<double> inv_range(nf, 0.0);
    double weight_sum = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
        if (!block.binary[f]) inv_range[f] = 1.0 / block.ranges[f];
        weight_sum += block.weights[f];
    }

    DissimilarityMatrix d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* a = &rows[i * nf];
        for (std::size_t j = i + 1; j < m; ++j) {
            const double* b = &rows[j * nf];
            double num = 0.0;
            for (std::size_t f = 0; f < nf; ++f) {
                const double diff = block.binary[f] ? (a[f] != b[f] ? 1.0 : 0.0) : std::abs(a[f] - b[f]) * inv_range[f];
                num += block.weights[f] * diff;
            }
            d.set(i, j, std::min(1.0, num / weight_sum));
        }
    }
    return d;
}

DissimilarityMatrix balanced_gower(const Dataset& data, std::span<const std::size_t> features) {
    return gower_matrix(data, features, balanced_weights(data, features));
}

void write_dense(std::ostream& out, const DissimilarityMatrix& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j) out << ' ';
            out << format_real(d(i, j));
        }
        out << '\n';
    }
}

} // namespace phenoclust
