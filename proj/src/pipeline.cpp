#include "phenoclust/pipeline.hpp"

#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/error.hpp"
#include "phenoclust/log.hpp"
#include "phenoclust/pair_indices.hpp"
#include "phenoclust/parallel.hpp"
#include "phenoclust/random.hpp"
#include "phenoclust/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>

namespace phenoclust::pipeline {
namespace {

int clamp_n_max(int n_max, std::size_t rows) {
    return std::min(n_max, static_cast<int>(rows));
}

double median(const std::vector<double>& values) { return stats::quantile(values, 0.5); }

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto out = fn();
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        log::info("stage", {{"stage", stage}, {"seconds", took.count()}});
        return out;
    } catch (const Error& e) {
        throw Error(e.category(), e.kind(), std::string("stage ") + stage + ": " + e.what());
    }
}

} // namespace

std::vector<std::size_t> FoldSpec::rows_in(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldSpec::rows_out(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldSpec make_folds(std::size_t m, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > m) {
        throw ConfigError("parameter", "fold count must satisfy 2 <= K <= m; got K = " + std::to_string(k));
    }
    FoldSpec spec;
    spec.k = k;
    spec.seed = seed;
    spec.assignment.assign(m, 0);
    const auto perm = rng::permutation(m, rng::hash(seed, 0x666F6C64ULL));
    for (std::size_t p = 0; p < m; ++p) spec.assignment[perm[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
    return spec;
}

double default_gamma_step(const Dataset& data, const SweepParams& params) {
    const auto model = glrm::fit(data, params.rank, params.gamma0, params.fit);
    const double gamma_max = glrm::zero_threshold(model, data);
    if (!(gamma_max > 0.0)) throw NumericalError("sweep", "cannot derive a gamma step: zero gradient at Y = 0");
    return gamma_max / 20.0;
}

SweepResult gamma_sweep(const Dataset& train, const SweepParams& params) {
    if (!(params.gamma0 >= 0.0)) throw ConfigError("parameter", "gamma0 must be >= 0");
    if (params.n_min < 2 || params.n_min > params.n_max) {
        throw ConfigError("parameter", "cluster range requires 2 <= n_min <= n_max");
    }
    if (static_cast<std::size_t>(params.n_min) > train.rows()) {
        throw ConfigError("parameter", "n_min exceeds the number of training rows");
    }

    SweepResult result;
    result.gamma_step = params.gamma_step > 0.0 ? params.gamma_step : default_gamma_step(train, params);
    const int n_max = clamp_n_max(params.n_max, train.rows());

    bool recorded = false;
    double gamma = params.gamma0;
    for (int step = 0; step < params.max_steps; ++step) {
        const auto model = glrm::fit(train, params.rank, gamma, params.fit);
        auto features = glrm::selected_features(model);

        SweepStep entry;
        entry.gamma = gamma;
        entry.n_features = features.size();
        if (features.size() < 2) {
            result.trace.push_back(entry);
            if (!recorded) {
                throw NumericalError("sweep", "gamma0 = " + format_real(params.gamma0) + " leaves " +
                                                  std::to_string(features.size()) +
                                                  " features; choose a smaller gamma0");
            }
            break;
        }

        const auto d = balanced_gower(train, features);
        entry.best_score = -1.0;
        for (int nc = params.n_min; nc <= n_max; ++nc) {
            auto clustering = pam(d, nc);
            if (clustering.silhouette > entry.best_score) {
                entry.best_score = clustering.silhouette;
                entry.best_n_c = nc;
            }
            if (clustering.silhouette > result.best_score) {
                entry.improved = true;
                recorded = true;
                result.best_score = clustering.silhouette;
                result.best_gamma = gamma;
                result.best_n_c = nc;
                result.features = features;
                result.clustering = std::move(clustering);
            }
        }
        result.trace.push_back(entry);
        if (!entry.improved) break;
        gamma += result.gamma_step;
        if (step + 1 == params.max_steps) log::warn("gamma_sweep_capped", {{"max_steps", params.max_steps}});
    }
    return result;
}

SelectionResult cv_feature_selection(const Dataset& data, const FoldSpec& folds, const SweepParams& params,
                                     std::size_t threads) {
    if (folds.assignment.size() != data.rows()) throw ConfigError("parameter", "fold assignment does not cover the data");

    SelectionResult result;
    result.per_fold.resize(static_cast<std::size_t>(folds.k));
    parallel_for(
        static_cast<std::size_t>(folds.k),
        [&](std::size_t fold) {
            FoldResult& out = result.per_fold[fold];
            out.fold = static_cast<int>(fold);
            out.train_rows = folds.rows_out(out.fold);
            out.validation_rows = folds.rows_in(out.fold);

            const Dataset train = subset_rows(data, out.train_rows);
            const SweepResult sweep = gamma_sweep(train, params);
            out.best_gamma = sweep.best_gamma;
            out.best_score = sweep.best_score;
            out.best_n_c = sweep.best_n_c;
            out.gamma_step = sweep.gamma_step;
            out.train_features = sweep.features;
            out.train_labels = sweep.clustering.labels;
            out.trace = sweep.trace;

            const Dataset validation = subset_rows(data, out.validation_rows);
            const auto model = glrm::fit(validation, params.rank, out.best_gamma, params.fit);
            out.validation_features = glrm::selected_features(model);
            if (!out.validation_features.empty() && validation.rows() >= static_cast<std::size_t>(params.n_min)) {
                const auto d = balanced_gower(validation, out.validation_features);
                const auto best = best_clustering(d, params.n_min, clamp_n_max(params.n_max, validation.rows()));
                out.validation_score = best.silhouette;
                out.validation_n_c = best.n_clusters;
                out.validation_labels = best.labels;
            }
        },
        threads);

    result.final_features = result.per_fold.front().validation_features;
    for (const auto& fold : result.per_fold) {
        std::vector<std::size_t> next;
        std::set_intersection(result.final_features.begin(), result.final_features.end(),
                              fold.validation_features.begin(), fold.validation_features.end(),
                              std::back_inserter(next));
        result.final_features = std::move(next);
    }
    if (result.final_features.empty()) {
        throw NumericalError("empty-intersection",
                             "no feature was selected in every validation fold; try a smaller gamma0 or gamma_step");
    }
    return result;
}

double stability(std::span<const std::size_t> fold_rows, std::span<const int> fold_labels,
                 std::span<const int> full_labels) {
    if (fold_rows.size() != fold_labels.size()) throw ConfigError("parameter", "fold rows and labels differ in length");
    std::vector<int> restricted;
    restricted.reserve(fold_rows.size());
    for (std::size_t r : fold_rows) {
        if (r >= full_labels.size()) throw ConfigError("parameter", "fold row outside the full labeling");
        restricted.push_back(full_labels[r]);
    }
    return pairwise_similarity_index(fold_labels, restricted);
}

NecessityReport shuffle_necessity_test(const Dataset& data, std::span<const std::size_t> features,
                                       const ClusterAssignment& baseline, const NecessityOptions& options) {
    if (options.repeats < 1) throw ConfigError("parameter", "repeats must be at least 1");
    if (baseline.labels.size() != data.rows()) throw ConfigError("parameter", "baseline labels must cover every row");
    if (features.empty()) throw ConfigError("configuration", "necessity test needs at least one feature");
    if (options.repeats == 1) log::warn("necessity_single_repeat", {{"repeats", 1}});

    NecessityReport report;
    report.n_clusters = baseline.n_clusters;
    report.repeats = options.repeats;
    report.threshold = options.threshold;
    report.baseline_self_psi = pairwise_similarity_index(baseline.labels, baseline.labels);

    const auto repeats = static_cast<std::size_t>(options.repeats);
    report.features.resize(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
        report.features[f].feature = features[f];
        report.features[f].jaccard.assign(repeats, 0.0);
        report.features[f].psi.assign(repeats, 0.0);
    }

    const std::size_t m = data.rows();
    parallel_for(
        features.size() * repeats,
        [&](std::size_t task) {
            const std::size_t f = task / repeats;
            const std::size_t r = task % repeats;
            const std::size_t column = features[f];
            const auto perm = rng::permutation(m, rng::hash(options.seed, column, r));
            Vector shuffled(static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < m; ++i) {
                shuffled(static_cast<Eigen::Index>(i)) =
                    data.values(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(column));
            }
            const Dataset permuted = with_column_values(data, column, shuffled);
            const auto clustering = pam(balanced_gower(permuted, features), baseline.n_clusters);
            report.features[f].psi[r] = pairwise_similarity_index(clustering.labels, baseline.labels);
            report.features[f].jaccard[r] = jaccard_coclustering(clustering.labels, baseline.labels);
        },
        options.threads);

    for (auto& fn : report.features) {
        fn.median_psi = median(fn.psi);
        fn.median_jaccard = median(fn.jaccard);
        std::vector<double> relative(fn.psi.size(), 1.0);
        if (report.baseline_self_psi > 0.0) {
            for (std::size_t r = 0; r < fn.psi.size(); ++r) relative[r] = fn.psi[r] / report.baseline_self_psi;
        }
        fn.median_relative_psi = median(relative);
        fn.necessary = fn.median_relative_psi < options.threshold;
    }
    return report;
}

PipelineResult run_full_pipeline(const Dataset& data, const PipelineConfig& config) {
    PipelineResult result;
    SweepParams sweep = config.sweep;
    sweep.fit.seed = config.seed;
    NecessityOptions necessity = config.necessity;
    necessity.seed = config.seed;
    necessity.threads = config.threads;
    const int n_max = clamp_n_max(sweep.n_max, data.rows());

    result.folds = run_stage("select", [&] { return make_folds(data.rows(), config.folds, config.seed); });
    result.selection = run_stage("select", [&] {
        return cv_feature_selection(data, result.folds, sweep, config.threads);
    });

    result.baseline = run_stage("baseline-cluster", [&] {
        return best_clustering(balanced_gower(data, result.selection.final_features), sweep.n_min, n_max);
    });

    result.necessity = run_stage("necessity", [&] {
        return shuffle_necessity_test(data, result.selection.final_features, result.baseline, necessity);
    });

    for (const auto& fn : result.necessity.features) {
        if (fn.necessary) result.surviving_features.push_back(fn.feature);
    }
    if (result.surviving_features.empty()) {
        log::warn("all_features_unnecessary", {{"kept", result.selection.final_features.size()}});
        result.surviving_features = result.selection.final_features;
    }

    result.final_clustering = run_stage("final-cluster", [&] {
        return best_clustering(balanced_gower(data, result.surviving_features), sweep.n_min, n_max);
    });

    run_stage("stability", [&] {
        for (const auto& fold : result.selection.per_fold) {
            FoldStability s;
            s.fold = fold.fold;
            s.train_psi = stability(fold.train_rows, fold.train_labels, result.final_clustering.labels);
            s.train_self_psi = pairwise_similarity_index(fold.train_labels, fold.train_labels);
            if (!fold.validation_labels.empty()) {
                s.validation_psi = stability(fold.validation_rows, fold.validation_labels, result.final_clustering.labels);
                s.validation_self_psi = pairwise_similarity_index(fold.validation_labels, fold.validation_labels);
            }
            result.stability.push_back(s);
        }
        return 0;
    });

    result.profile = run_stage("profile", [&] {
        return profile_clusters(data, result.final_clustering.labels, result.surviving_features, config.alpha);
    });
    return result;
}

} // namespace phenoclust::pipeline
