#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace phenoclust {

/// Pair-counting summary of two labelings of the same rows.
struct PairCounts {
    std::uint64_t total = 0; // m (m - 1) / 2
    std::uint64_t in_a = 0;  // pairs co-clustered in A
    std::uint64_t in_b = 0;
    std::uint64_t in_both = 0;
};

/// Computed from the contingency table, O(m log m). Throws
/// ConfigError("parameter") on length mismatch or fewer than two rows.
PairCounts pair_counts(std::span<const int> a, std::span<const int> b);

/// Fraction of all row pairs co-clustered in both labelings.
double pairwise_similarity_index(std::span<const int> a, std::span<const int> b);

/// |co(A) & co(B)| / |co(A) | co(B)|; 1 when both sets are empty.
double jaccard_coclustering(std::span<const int> a, std::span<const int> b);

} // namespace phenoclust
