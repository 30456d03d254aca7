#pragma once

#include "phenoclust/clustering.hpp"
#include "phenoclust/dataset.hpp"

#include <cstdint>
#include <vector>

namespace phenoclust::synth {

struct PlantSpec {
    std::size_t m = 400;
    std::size_t n_informative = 5;
    std::size_t n_noise = 20;
    int n_clusters = 4;
    /// Distance between adjacent cluster centers, in within-cluster sd units.
    double separation = 6.0;
    /// Share of informative and of noise features that are binary (rounded).
    double binary_fraction = 0.3;
    /// Each cell independently masked with this probability.
    double missing_fraction = 0.0;
    std::uint64_t seed = 0;
};

struct Planted {
    /// Finalized when missing_fraction == 0; otherwise raw with the mask set.
    Dataset data;
    Labels true_labels;
    std::vector<std::size_t> informative; // column indices, ascending
    std::vector<std::size_t> noise;
};

/// Informative numeric columns: each feature orders the clusters by its own
/// permutation and places adjacent centers `separation` apart, unit noise.
/// Informative binary columns: per-cluster Bernoulli rates evenly spread over
/// [0.1, 0.9]. Noise columns ignore the clusters; numeric noise matches the
/// marginal spread of the informative columns. Every draw is a counter-based
/// function of (seed, row, column).
Planted generate_planted(const PlantSpec& spec);

} // namespace phenoclust::synth
