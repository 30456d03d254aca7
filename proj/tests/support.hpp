#pragma once

// Builders and brute-force oracles shared by the unit and acceptance tests.
// The oracles are deliberately naive and independent of the library code.

#include "phenoclust/clustering.hpp"
#include "phenoclust/dataset.hpp"
#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace support {

using phenoclust::ColumnKind;
using phenoclust::Dataset;

/// Finalized dataset from a column-major list of values; binary columns must
/// hold 0/1. Constant columns are kept (stats computed) so shapes stay fixed.
inline Dataset make_dataset(const std::vector<std::vector<double>>& columns, const std::vector<ColumnKind>& kinds) {
    Dataset d;
    const std::size_t m = columns.empty() ? 0 : columns.front().size();
    d.row_ids.resize(m);
    for (std::size_t i = 0; i < m; ++i) d.row_ids[i] = "r" + std::to_string(i);
    d.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(columns.size()));
    d.missing = phenoclust::MaskMatrix::Constant(d.values.rows(), d.values.cols(), false);
    d.levels.assign(columns.size(), {});
    for (std::size_t j = 0; j < columns.size(); ++j) {
        phenoclust::ColumnMeta meta;
        meta.name = "c" + std::to_string(j);
        meta.origin = meta.name;
        meta.kind = kinds[j];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = columns[j][i];
            d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        meta.mean = sum / static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) ss += (columns[j][i] - meta.mean) * (columns[j][i] - meta.mean);
        meta.variance = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;
        meta.min = lo;
        meta.max = hi;
        meta.range = hi - lo;
        d.columns.push_back(meta);
    }
    return d;
}

/// Random mixed-type dataset; binary columns are guaranteed non-constant
/// when m >= 2, numeric columns are standard normal scaled by `scale`.
inline Dataset random_mixed(std::size_t m, std::size_t n, double binary_share, std::uint64_t seed, double scale = 1.0) {
    std::vector<std::vector<double>> cols(n, std::vector<double>(m));
    std::vector<ColumnKind> kinds(n);
    for (std::size_t j = 0; j < n; ++j) {
        const bool binary = phenoclust::rng::uniform(seed, 1, j) < binary_share;
        kinds[j] = binary ? ColumnKind::Binary : ColumnKind::Numeric;
        for (std::size_t i = 0; i < m; ++i) {
            cols[j][i] = binary ? (phenoclust::rng::uniform(seed, 2, i, j) < 0.5 ? 1.0 : 0.0)
                                : scale * phenoclust::rng::gaussian(seed, 3, i, j);
        }
        if (binary && m >= 2) {
            cols[j][0] = 0.0;
            cols[j][1] = 1.0;
        }
    }
    return make_dataset(cols, kinds);
}

inline phenoclust::DissimilarityMatrix random_dissimilarity(std::size_t m, std::uint64_t seed) {
    phenoclust::DissimilarityMatrix d(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) d.set(i, j, phenoclust::rng::uniform(seed, i, j));
    }
    return d;
}

inline std::vector<int> random_labels(std::size_t m, int k, std::uint64_t seed) {
    std::vector<int> labels(m);
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = static_cast<int>(phenoclust::rng::hash(seed, i) % static_cast<std::uint64_t>(k));
    }
    return labels;
}

/// Minimum k-medoids cost over every k-subset of rows.
inline double brute_force_kmedoids(const phenoclust::DissimilarityMatrix& d, int k) {
    const std::size_t m = d.size();
    std::vector<int> pick(m, 0);
    std::fill(pick.begin(), pick.begin() + k, 1);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                if (pick[j]) nearest = std::min(nearest, d(i, j));
            }
            cost += nearest;
        }
        best = std::min(best, cost);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

/// Textbook silhouette: a = mean distance to own cluster, b = smallest mean
/// distance to another cluster, singletons score 0.
inline double naive_silhouette(const phenoclust::DissimilarityMatrix& d, const std::vector<int>& labels) {
    const std::size_t m = labels.size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::map<int, std::pair<double, int>> sums;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            auto& s = sums[labels[j]];
            s.first += d(i, j);
            s.second += 1;
        }
        const auto own = sums.find(labels[i]);
        if (own == sums.end()) continue; // singleton
        const double a = own->second.first / own->second.second;
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, s] : sums) {
            if (label != labels[i]) b = std::min(b, s.first / s.second);
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(m);
}

struct PairTally {
    double both = 0, in_a = 0, in_b = 0, total = 0;
};

inline PairTally enumerate_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    PairTally t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool ca = a[i] == a[j];
            const bool cb = b[i] == b[j];
            t.total += 1;
            t.in_a += ca;
            t.in_b += cb;
            t.both += ca && cb;
        }
    }
    return t;
}

/// Exact two-sided Mann-Whitney p for tie-free samples by enumerating every
/// assignment of the pooled ranks to sample a.
inline double exact_mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    double rank_sum_a = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (order[r] < n1) rank_sum_a += static_cast<double>(r + 1);
    }
    const double u_obs = rank_sum_a - static_cast<double>(n1 * (n1 + 1)) / 2.0;

    std::vector<int> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), 1);
    double le = 0, ge = 0, count = 0;
    do {
        double rs = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (pick[r]) rs += static_cast<double>(r + 1);
        }
        const double u = rs - static_cast<double>(n1 * (n1 + 1)) / 2.0;
        count += 1;
        le += u <= u_obs + 1e-9;
        ge += u >= u_obs - 1e-9;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return std::min(1.0, 2.0 * std::min(le, ge) / count);
}

} // namespace support
