#pragma once

#include "phenoclust/dataset.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace phenoclust {

/// Dense symmetric matrix of pairwise dissimilarities with a zero diagonal.
class DissimilarityMatrix {
public:
    DissimilarityMatrix() = default;
    explicit DissimilarityMatrix(std::size_t size) : size_(size), values_(size * size, 0.0) {}

    /// Validates symmetry, zero diagonal and [0, 1] range.
    static DissimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * size_ + j]; }
    void set(std::size_t i, std::size_t j, double value) noexcept {
        values_[i * size_ + j] = value;
        values_[j * size_ + i] = value;
    }
    std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * size_, size_}; }

    DissimilarityMatrix subset(std::span<const std::size_t> rows) const;

    bool operator==(const DissimilarityMatrix&) const = default;

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

/// Per-feature Gower weights keyed by dataset column index.
struct FeatureWeights {
    std::vector<std::size_t> features;
    std::vector<double> weights;

    /// Weight 1 for every feature.
    static FeatureWeights uniform(std::span<const std::size_t> features);
    double weight_of(std::size_t feature) const;
};

/// Weighted Gower dissimilarity of two complete rows. Numeric features
/// contribute |a - b| / range, binary features a mismatch indicator.
/// `metas` and `weights` are aligned with the row entries.
double gower_pair(std::span<const double> row_a, std::span<const double> row_b, std::span<const ColumnMeta> metas,
                  std::span<const double> weights);

/// Numeric features get weight 1; binary features get the ratio of the mean
/// numeric per-feature dissimilarity to the mean binary one, taken over all
/// row pairs. Either block missing, or a zero binary mean, gives all ones.
FeatureWeights balanced_weights(const Dataset& data, std::span<const std::size_t> features);

/// Every unordered pair computed once; features are summed in ascending
/// column order so the result does not depend on the order given.
DissimilarityMatrix gower_matrix(const Dataset& data, std::span<const std::size_t> features,
                                 const FeatureWeights& weights);

/// balanced_weights followed by gower_matrix.
DissimilarityMatrix balanced_gower(const Dataset& data, std::span<const std::size_t> features);

/// Row-major dense text, space separated, 17 significant digits.
void write_dense(std::ostream& out, const DissimilarityMatrix& d);

} // namespace phenoclust
