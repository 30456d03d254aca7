#include "phenoclust/clustering.hpp"

#include "phenoclust/csv.hpp"
#include "phenoclust/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>

namespace phenoclust {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nearest and second-nearest medoid distances for every row.
struct Nearest {
    std::vector<std::size_t> nearest; // position in the medoid list
    std::vector<double> first;
    std::vector<double> second;
};

Nearest nearest_medoids(const DissimilarityMatrix& d, const std::vector<std::size_t>& medoids) {
    const std::size_t m = d.size();
    Nearest out{std::vector<std::size_t>(m, 0), std::vector<double>(m, kInf), std::vector<double>(m, kInf)};
    for (std::size_t j = 0; j < m; ++j) {
        const auto row = d.row(j);
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double v = row[medoids[c]];
            if (v < out.first[j]) {
                out.second[j] = out.first[j];
                out.first[j] = v;
                out.nearest[j] = c;
            } else if (v < out.second[j]) {
                out.second[j] = v;
            }
        }
    }
    return out;
}

std::vector<std::size_t> build(const DissimilarityMatrix& d, std::size_t k) {
    const std::size_t m = d.size();
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(m, false);

    std::size_t first = 0;
    double best = kInf;
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (double v : d.row(i)) sum += v;
        if (sum < best) {
            best = sum;
            first = i;
        }
    }
    medoids.push_back(first);
    is_medoid[first] = true;
    std::vector<double> nearest(d.row(first).begin(), d.row(first).end());

    while (medoids.size() < k) {
        std::size_t pick = m;
        double best_gain = -1.0;
        for (std::size_t h = 0; h < m; ++h) {
            if (is_medoid[h]) continue;
            const auto row = d.row(h);
            double gain = 0.0;
            for (std::size_t j = 0; j < m; ++j) gain += std::max(nearest[j] - row[j], 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                pick = h;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = true;
        const auto row = d.row(pick);
        for (std::size_t j = 0; j < m; ++j) nearest[j] = std::min(nearest[j], row[j]);
    }
    return medoids;
}

} // namespace

double medoid_cost(const DissimilarityMatrix& d, std::span<const std::size_t> medoids) {
    double cost = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        double best = kInf;
        for (std::size_t c : medoids) best = std::min(best, d(j, c));
        cost += best;
    }
    return cost;
}

ClusterAssignment pam(const DissimilarityMatrix& d, int n_clusters) {
    const std::size_t m = d.size();
    if (n_clusters < 2 || static_cast<std::size_t>(n_clusters) > m) {
        throw ConfigError("parameter", "n_clusters must lie in [2, m]; got " + std::to_string(n_clusters) +
                                           " for m = " + std::to_string(m));
    }
    const auto k = static_cast<std::size_t>(n_clusters);

    std::vector<std::size_t> medoids = build(d, k);
    std::vector<bool> is_medoid(m, false);
    for (std::size_t c : medoids) is_medoid[c] = true;

    ClusterAssignment out;
    Nearest near = nearest_medoids(d, medoids);
    double cost = 0.0;
    for (double v : near.first) cost += v;
    // Improvements below this are rounding noise and would risk cycling.
    const double eps = 1e-12 * std::max(1.0, cost);

    for (;;) {
        // Visit medoids in ascending row order so ties resolve to the lowest index.
        std::vector<std::size_t> order(k);
        for (std::size_t c = 0; c < k; ++c) order[c] = c;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return medoids[a] < medoids[b]; });

        double best_delta = -eps;
        std::size_t best_slot = k;
        std::size_t best_candidate = m;
        for (std::size_t slot : order) {
            for (std::size_t h = 0; h < m; ++h) {
                if (is_medoid[h]) continue;
                const auto row_h = d.row(h);
                double delta = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double remaining = near.nearest[j] == slot ? near.second[j] : near.first[j];
                    delta += std::min(row_h[j], remaining) - near.first[j];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_slot = slot;
                    best_candidate = h;
                }
            }
        }
        if (best_slot == k) break;
        is_medoid[medoids[best_slot]] = false;
        is_medoid[best_candidate] = true;
        medoids[best_slot] = best_candidate;
        near = nearest_medoids(d, medoids);
        cost = 0.0;
        for (double v : near.first) cost += v;
        ++out.swaps;
    }

    std::sort(medoids.begin(), medoids.end());
    out.medoids = medoids;
    out.n_clusters = n_clusters;
    out.labels.assign(m, 0);
    out.cost = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double best = kInf;
        for (std::size_t c = 0; c < k; ++c) {
            const double v = d(j, medoids[c]);
            if (v < best) {
                best = v;
                out.labels[j] = static_cast<int>(c);
            }
        }
        out.cost += best;
    }
    for (std::size_t c = 0; c < k; ++c) out.labels[medoids[c]] = static_cast<int>(c);
    out.silhouette = silhouette(d, out.labels);
    return out;
}

double silhouette(const DissimilarityMatrix& d, std::span<const int> labels) {
    const std::size_t m = d.size();
    if (labels.size() != m) throw ConfigError("parameter", "label count does not match the matrix size");

    std::map<int, std::size_t> index;
    for (int label : labels) index.emplace(label, 0);
    if (index.size() < 2) throw ConfigError("parameter", "silhouette needs at least two clusters");
    std::size_t next = 0;
    for (auto& [label, idx] : index) idx = next++;
    const std::size_t g = index.size();

    std::vector<std::size_t> cluster(m);
    std::vector<std::size_t> size(g, 0);
    for (std::size_t i = 0; i < m; ++i) {
        cluster[i] = index.at(labels[i]);
        ++size[cluster[i]];
    }

    std::vector<double> sums(g);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t own = cluster[i];
        if (size[own] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        const auto row = d.row(i);
        for (std::size_t j = 0; j < m; ++j) sums[cluster[j]] += row[j];
        const double a = sums[own] / static_cast<double>(size[own] - 1);
        double b = kInf;
        for (std::size_t c = 0; c < g; ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(size[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(m);
}

ClusterAssignment best_clustering(const DissimilarityMatrix& d, int n_min, int n_max) {
    if (n_min < 2 || n_min > n_max) throw ConfigError("parameter", "cluster range requires 2 <= n_min <= n_max");
    if (static_cast<std::size_t>(n_max) > d.size()) throw ConfigError("parameter", "n_max exceeds the number of rows");
    ClusterAssignment best;
    bool have = false;
    for (int nc = n_min; nc <= n_max; ++nc) {
        ClusterAssignment candidate = pam(d, nc);
        if (!have || candidate.silhouette > best.silhouette) {
            best = std::move(candidate);
            have = true;
        }
    }
    return best;
}

void write_assignment(std::ostream& out, std::span<const std::string> row_ids, const ClusterAssignment& assignment) {
    if (row_ids.size() != assignment.labels.size()) throw DataError("shape", "row ids do not match the labels");
    std::vector<bool> medoid(row_ids.size(), false);
    for (std::size_t c : assignment.medoids) medoid[c] = true;
    csv::write_record(out, {"row_id", "cluster", "is_medoid"});
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        csv::write_record(out, {row_ids[i], std::to_string(assignment.labels[i]), medoid[i] ? "1" : "0"});
    }
}

} // namespace phenoclust
