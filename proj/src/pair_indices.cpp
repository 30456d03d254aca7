#include "phenoclust/pair_indices.hpp"

#include "phenoclust/error.hpp"

#include <map>
#include <utility>

namespace phenoclust {
namespace {

std::uint64_t choose2(std::uint64_t n) { return n * (n - 1) / 2; }

} // namespace

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw ConfigError("parameter", "labelings must have equal length");
    if (a.size() < 2) throw ConfigError("parameter", "labelings need at least two rows");

    std::map<int, std::uint64_t> count_a;
    std::map<int, std::uint64_t> count_b;
    std::map<std::pair<int, int>, std::uint64_t> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++count_a[a[i]];
        ++count_b[b[i]];
        ++joint[{a[i], b[i]}];
    }
    PairCounts out;
    out.total = choose2(a.size());
    for (const auto& [label, n] : count_a) out.in_a += choose2(n);
    for (const auto& [label, n] : count_b) out.in_b += choose2(n);
    for (const auto& [cell, n] : joint) out.in_both += choose2(n);
    return out;
}

double pairwise_similarity_index(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    return static_cast<double>(c.in_both) / static_cast<double>(c.total);
}

double jaccard_coclustering(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    const std::uint64_t uni = c.in_a + c.in_b - c.in_both;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.in_both) / static_cast<double>(uni);
}

} // namespace phenoclust
