#pragma once

#include "phenoclust/dataset.hpp"
#include "phenoclust/dissimilarity.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace phenoclust {

using Labels = std::vector<int>;

struct ClusterAssignment {
    Labels labels;                     // cluster index per row
    std::vector<std::size_t> medoids;  // ascending row indices; medoid c labels cluster c
    int n_clusters = 0;
    double silhouette = 0.0;
    double cost = 0.0;                 // sum of dissimilarities to assigned medoids
    int swaps = 0;
};

/// Classic PAM: greedy BUILD then repeated best-improvement SWAP. All ties go
/// to the lowest index, so the result is fully deterministic. The silhouette
/// field is filled in. Requires 2 <= n_clusters <= m.
ClusterAssignment pam(const DissimilarityMatrix& d, int n_clusters);

/// Total cost of a medoid set under nearest-medoid assignment.
double medoid_cost(const DissimilarityMatrix& d, std::span<const std::size_t> medoids);

/// Mean silhouette width; rows in singleton clusters score 0. Labels may be
/// any integers. Throws ConfigError("parameter") for fewer than two clusters.
double silhouette(const DissimilarityMatrix& d, std::span<const int> labels);

/// PAM for every n_c in [n_min, n_max]; highest silhouette wins, ties go to
/// the smaller n_c.
ClusterAssignment best_clustering(const DissimilarityMatrix& d, int n_min, int n_max);

/// CSV rows of (row_id, cluster, is_medoid).
void write_assignment(std::ostream& out, std::span<const std::string> row_ids, const ClusterAssignment& assignment);

} // namespace phenoclust
