#pragma once

#include "phenoclust/dataset.hpp"
#include "phenoclust/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace phenoclust {

struct NumericSummary {
    double median = 0.0;
    double iqr = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t n = 0;
};

struct BinarySummary {
    double percent = 0.0;
    std::int64_t count = 0;
    std::size_t n = 0;
};

struct PairwiseComparison {
    int cluster_a = 0;
    int cluster_b = 0;
    double p_value = 1.0;
    double adjusted_p = 1.0;
};

struct FeatureProfile {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<NumericSummary> numeric; // one per cluster, numeric features
    std::vector<BinarySummary> binary;   // one per cluster, binary features
    stats::StatResult test;              // p_value NaN when the test is undefined
    std::vector<PairwiseComparison> posthoc;
};

struct ClusterProfile {
    std::vector<int> clusters; // distinct labels, ascending
    std::vector<std::size_t> sizes;
    double alpha = 0.05;
    std::vector<FeatureProfile> features;
};

/// Per-cluster medians/IQRs with Kruskal-Wallis (and Holm-adjusted pairwise
/// Mann-Whitney when p < alpha) for numeric features; per-cluster percent and
/// count with Pearson chi-squared for binary ones. Missing cells are skipped
/// feature by feature.
ClusterProfile profile_clusters(const Dataset& data, std::span<const int> labels, std::span<const std::size_t> features,
                                double alpha = 0.05);

/// Table layout: feature, kind, then two columns per cluster (median/IQR or
/// percent/count), then test, statistic, df, p_value, posthoc.
void write_profile_csv(std::ostream& out, const ClusterProfile& profile);

} // namespace phenoclust
