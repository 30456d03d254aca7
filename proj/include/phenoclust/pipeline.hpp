#pragma once

#include "phenoclust/clustering.hpp"
#include "phenoclust/dataset.hpp"
#include "phenoclust/glrm.hpp"
#include "phenoclust/profile.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace phenoclust::pipeline {

struct FoldSpec {
    int k = 0;
    std::vector<int> assignment; // fold index per row
    std::uint64_t seed = 0;

    std::vector<std::size_t> rows_in(int fold) const;
    std::vector<std::size_t> rows_out(int fold) const;
};

/// Seeded permutation of the rows dealt round-robin into k folds.
FoldSpec make_folds(std::size_t m, int k, std::uint64_t seed);

struct SweepParams {
    double gamma0 = 0.0;
    /// <= 0 selects the step automatically, see default_gamma_step.
    double gamma_step = 0.0;
    int n_min = 2;
    int n_max = 8;
    int rank = 2;
    glrm::FitOptions fit = [] {
        glrm::FitOptions o;
        o.restarts = 8;
        return o;
    }();
    /// Safety cap on the number of gamma values tried.
    int max_steps = 1000;
};

/// A twentieth of the gamma that zeroes every column of Y, measured at the
/// factorization fitted with gamma0.
double default_gamma_step(const Dataset& data, const SweepParams& params);

struct SweepStep {
    double gamma = 0.0;
    std::size_t n_features = 0;
    double best_score = 0.0; // best silhouette at this gamma
    int best_n_c = 0;
    bool improved = false;
};

struct SweepResult {
    double best_gamma = 0.0;
    double best_score = -1.0;
    int best_n_c = 0;
    std::vector<std::size_t> features;
    ClusterAssignment clustering;
    double gamma_step = 0.0;
    std::vector<SweepStep> trace;
};

/// Raises gamma from gamma0 by gamma_step while some cluster count improves
/// the best silhouette seen so far; stops at the first gamma with no
/// improvement or when fewer than two features survive. Returns the best
/// recorded gamma. Throws NumericalError("sweep") if gamma0 already leaves
/// fewer than two features.
SweepResult gamma_sweep(const Dataset& train, const SweepParams& params);

struct FoldResult {
    int fold = 0;
    double best_gamma = 0.0;
    double best_score = -1.0;
    int best_n_c = 0;
    double gamma_step = 0.0;
    std::vector<std::size_t> train_features;
    std::vector<std::size_t> validation_features;
    double validation_score = -1.0;
    int validation_n_c = 0;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    Labels train_labels;
    Labels validation_labels;
    std::vector<SweepStep> trace;
};

struct SelectionResult {
    std::vector<FoldResult> per_fold;
    std::vector<std::size_t> final_features;
};

/// Gamma sweep on each fold's training rows, then feature selection and
/// clustering on its validation rows at the training-best gamma. The final
/// set is the intersection of the validation feature sets. Folds run
/// concurrently. Throws NumericalError("empty-intersection").
SelectionResult cv_feature_selection(const Dataset& data, const FoldSpec& folds, const SweepParams& params,
                                     std::size_t threads = 0);

/// PSI between a fold's clustering and the full clustering restricted to the
/// fold rows.
double stability(std::span<const std::size_t> fold_rows, std::span<const int> fold_labels,
                 std::span<const int> full_labels);

struct NecessityOptions {
    int repeats = 500;
    /// A feature is unnecessary when the median relative PSI reaches this.
    double threshold = 0.9;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct FeatureNecessity {
    std::size_t feature = 0;
    std::vector<double> jaccard;
    std::vector<double> psi;
    double median_psi = 0.0;
    /// Median of PSI / PSI(baseline, baseline): the share of the baseline's
    /// co-clustered pairs that survive the shuffle.
    double median_relative_psi = 0.0;
    double median_jaccard = 0.0;
    bool necessary = true;
};

struct NecessityReport {
    int n_clusters = 0;
    int repeats = 0;
    double threshold = 0.0;
    double baseline_self_psi = 0.0;
    std::vector<FeatureNecessity> features;
};

/// For every feature and repeat, permutes that column with a permutation
/// derived from (seed, feature, repeat), re-clusters at the baseline cluster
/// count and compares with the baseline labels.
NecessityReport shuffle_necessity_test(const Dataset& data, std::span<const std::size_t> features,
                                       const ClusterAssignment& baseline, const NecessityOptions& options);

struct PipelineConfig {
    int folds = 5;
    SweepParams sweep;
    NecessityOptions necessity;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct FoldStability {
    int fold = 0;
    double train_psi = 0.0;
    double validation_psi = 0.0;
    double train_self_psi = 0.0;
    double validation_self_psi = 0.0;
};

struct PipelineResult {
    FoldSpec folds;
    SelectionResult selection;
    ClusterAssignment baseline;
    NecessityReport necessity;
    std::vector<std::size_t> surviving_features;
    ClusterAssignment final_clustering;
    std::vector<FoldStability> stability;
    ClusterProfile profile;
};

/// selection -> necessity -> drop unnecessary features -> final clustering ->
/// per-fold stability -> profile. Failures are rethrown with the stage name.
PipelineResult run_full_pipeline(const Dataset& data, const PipelineConfig& config);

} // namespace phenoclust::pipeline
