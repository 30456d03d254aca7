// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-phenoclust-cli> <scratch-dir>

#include "phenoclust/clustering.hpp"
#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/error.hpp"
#include "phenoclust/glrm.hpp"
#include "phenoclust/log.hpp"
#include "phenoclust/pair_indices.hpp"
#include "phenoclust/pipeline.hpp"
#include "phenoclust/random.hpp"
#include "phenoclust/stats.hpp"
#include "phenoclust/synth.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

using namespace phenoclust;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

glrm::GlrmModel random_model(const Dataset& data, int rank, std::uint64_t seed) {
    glrm::GlrmModel model;
    model.rank = rank;
    model.loss_kinds = glrm::loss_kinds_for(data);
    model.x.resize(static_cast<Eigen::Index>(data.rows()), rank);
    model.y.resize(rank, static_cast<Eigen::Index>(data.cols()));
    for (Eigen::Index i = 0; i < model.x.rows(); ++i)
        for (Eigen::Index r = 0; r < rank; ++r) model.x(i, r) = rng::gaussian(seed, 20, i, r);
    for (Eigen::Index r = 0; r < rank; ++r)
        for (Eigen::Index j = 0; j < model.y.cols(); ++j) model.y(r, j) = rng::gaussian(seed, 21, r, j);
    model.offsets = glrm::default_offsets(data);
    return model;
}

bool near_hinge_kink(const glrm::GlrmModel& model, const Dataset& data) {
    const Matrix z = model.x * model.y;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.columns[j].kind != ColumnKind::Binary) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const double s = 2.0 * data.values(i, jj) - 1.0;
            if (std::abs(1.0 - s * (z(i, jj) + model.offsets(jj))) < 1e-3) return true;
        }
    }
    return false;
}

Outcome gradient_check() {
    const auto start = Clock::now();
    const double h = 1e-6;
    double worst = 0.0;
    int instances = 0;
    for (std::uint64_t seed = 0; instances < 50; ++seed) {
        const std::size_t m = 2 + rng::hash(seed, 1) % 5, n = 2 + rng::hash(seed, 2) % 5;
        const auto data = support::random_mixed(m, n, 0.4, seed, 2.0);
        auto model = random_model(data, 2, seed);
        if (near_hinge_kink(model, data)) continue;
        ++instances;
        const auto g = glrm::data_fit_gradient(model, data);
        auto probe = [&](double& entry, double analytic) {
            const double saved = entry;
            entry = saved + h;
            const double up = glrm::data_fit(model, data);
            entry = saved - h;
            const double down = glrm::data_fit(model, data);
            entry = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double rel = std::abs(numeric - analytic) / std::max(1.0, std::max(std::abs(numeric), std::abs(analytic)));
            worst = std::max(worst, rel);
        };
        for (Eigen::Index i = 0; i < model.x.rows(); ++i)
            for (Eigen::Index r = 0; r < 2; ++r) probe(model.x(i, r), g.x(i, r));
        for (Eigen::Index r = 0; r < 2; ++r)
            for (Eigen::Index j = 0; j < model.y.cols(); ++j) probe(model.y(r, j), g.y(r, j));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-4 && elapsed < 10.0,
            "50 instances, worst relative error " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome monotonicity() {
    double worst_rise = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = support::random_mixed(100, 20, 0.3, 100 + seed);
        glrm::FitOptions options;
        options.seed = seed;
        const auto model = glrm::fit(data, 2, 1.0, options);
        for (std::size_t t = 1; t < model.objective_trace.size(); ++t) {
            worst_rise = std::max(worst_rise, model.objective_trace[t] - model.objective_trace[t - 1]);
        }
    }
    return {worst_rise <= 1e-9, "20 instances, largest step increase " + fmt(worst_rise)};
}

Outcome rank_recovery() {
    std::vector<std::vector<double>> cols(10, std::vector<double>(40));
    for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t i = 0; i < 40; ++i) cols[j][i] = rng::gaussian(31, 1, i) * rng::gaussian(31, 2, j) * 4.0;
    const auto data = support::make_dataset(cols, std::vector<ColumnKind>(10, ColumnKind::Numeric));
    glrm::FitOptions options;
    options.offsets = false;
    options.max_iters = 5000;
    options.rel_tol = 1e-14;
    const auto model = glrm::fit(data, 1, 0.0, options);
    const double ratio = model.objective_trace.back() / model.objective_trace.front();
    return {ratio <= 1e-6, "final/initial objective " + fmt(ratio)};
}

Outcome shrinkage() {
    const auto data = support::random_mixed(80, 12, 0.3, 44);
    const auto base = glrm::fit(data, 2, 0.0);
    const double gamma_max = glrm::zero_threshold(base, data);
    std::size_t previous = data.cols();
    bool monotone = true;
    std::size_t last = data.cols();
    std::string counts;
    for (int s = 0; s <= 30; ++s) {
        const double gamma = 2.0 * gamma_max * s / 30.0;
        const auto model = glrm::fit(data, 2, gamma);
        last = glrm::selected_features(model).size();
        if (last > previous + 1) monotone = false;
        previous = last;
        counts += (s ? "," : "") + std::to_string(last);
    }
    return {monotone && last == 0, "selected counts along the grid " + counts};
}

Outcome pam_oracle() {
    const auto start = Clock::now();
    int mismatches = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t m = 4 + rng::hash(seed, 5) % 9;
        const int k = 2 + static_cast<int>(rng::hash(seed, 6) % 2);
        const auto d = support::random_dissimilarity(m, 500 + seed);
        if (std::abs(pam(d, k).cost - support::brute_force_kmedoids(d, k)) > 1e-12) ++mismatches;
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 30.0,
            std::to_string(mismatches) + " of 100 differ from exhaustive search, " + fmt(elapsed) + " s"};
}

Outcome gower_properties() {
    const auto data = support::random_mixed(1000, 8, 0.4, 66, 3.0);
    std::vector<std::size_t> all, num, bin;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        all.push_back(j);
        (data.columns[j].kind == ColumnKind::Binary ? bin : num).push_back(j);
    }
    const auto d = balanced_gower(data, all);
    bool shape_ok = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
        shape_ok = shape_ok && d(i, i) == 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) shape_ok = shape_ok && d(i, j) == d(j, i) && d(i, j) >= 0.0 && d(i, j) <= 1.0;
    }
    const auto w = balanced_weights(data, all);
    double num_mean = 0.0, bin_mean = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t k = i + 1; k < data.rows(); ++k) {
            pairs += 1.0;
            for (std::size_t f : num)
                num_mean += std::abs(data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) -
                                     data.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f))) /
                            data.columns[f].range;
            for (std::size_t f : bin)
                bin_mean += w.weight_of(f) * (data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) !=
                                              data.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)));
        }
    }
    num_mean /= pairs * static_cast<double>(num.size());
    bin_mean /= pairs * static_cast<double>(bin.size());
    const double gap = std::abs(num_mean - bin_mean);
    return {shape_ok && !num.empty() && !bin.empty() && gap <= 1e-9,
            std::string(shape_ok ? "symmetric, zero diagonal, within [0,1]" : "matrix property violated") +
                "; weighted block means differ by " + fmt(gap)};
}

Outcome silhouette_check() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t m = 5 + rng::hash(seed, 7) % 30;
        const int k = 2 + static_cast<int>(rng::hash(seed, 8) % 4);
        const auto d = support::random_dissimilarity(m, 900 + seed);
        auto labels = support::random_labels(m, k, seed);
        labels[0] = 0;
        labels[1] = 1;
        worst = std::max(worst, std::abs(silhouette(d, labels) - support::naive_silhouette(d, labels)));
    }
    const auto pairs = DissimilarityMatrix::from_rows({{0, 0.01, 1, 1}, {0.01, 0, 1, 1}, {1, 1, 0, 0.01}, {1, 1, 0.01, 0}});
    const double s = silhouette(pairs, std::vector<int>{0, 0, 1, 1});
    return {worst <= 1e-12 && std::abs(s - 0.99) <= 1e-12,
            "worst deviation from naive " + fmt(worst) + ", two-pair instance " + fmt(s)};
}

Outcome statistics_oracles() {
    std::vector<std::string> failed;
    const auto kw = stats::kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    if (std::abs(kw.statistic - 7.2) > 1e-12) failed.push_back("kruskal-wallis");
    const auto chi = stats::pearson_chi_squared({{20, 0}, {0, 20}});
    if (std::abs(chi.statistic - 40.0) > 1e-12 || chi.df != 1.0) failed.push_back("pearson");
    const auto holm = stats::holm_adjust(std::vector<double>{0.01, 0.04, 0.03});
    if (std::abs(holm[0] - 0.03) > 1e-15 || std::abs(holm[1] - 0.06) > 1e-15 || std::abs(holm[2] - 0.06) > 1e-15)
        failed.push_back("holm");
    double tail_gap = 0.0;
    for (int i = 0; i <= 5000; ++i) {
        const double x = i * 0.01;
        tail_gap = std::max(tail_gap, std::abs(stats::chi_squared_sf(x, 2.0) - std::exp(-x / 2.0)));
    }
    if (tail_gap > 1e-10) failed.push_back("chi-squared tail");

    // every rank split of sizes n1 + n2 <= 8
    double mw_gap = 0.0;
    std::string mw_where;
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::size_t n1 = 1; n1 < n; ++n1) {
            std::vector<int> pick(n, 0);
            std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), 1);
            do {
                std::vector<double> a, b;
                for (std::size_t r = 0; r < n; ++r) (pick[r] ? a : b).push_back(static_cast<double>(r + 1));
                const double gap = std::abs(stats::mann_whitney_u(a, b).p_value - support::exact_mann_whitney_p(a, b));
                if (gap > mw_gap) {
                    mw_gap = gap;
                    mw_where = "(" + std::to_string(n1) + "," + std::to_string(n - n1) + ")";
                }
            } while (std::prev_permutation(pick.begin(), pick.end()));
        }
    }
    if (mw_gap > 0.01) failed.push_back("mann-whitney");

    std::string detail = "KW H " + fmt(kw.statistic) + ", X2 " + fmt(chi.statistic) + " df " + fmt(chi.df) +
                         ", Holm [" + fmt(holm[0]) + "," + fmt(holm[1]) + "," + fmt(holm[2]) + "], df=2 tail gap " +
                         fmt(tail_gap) + ", Mann-Whitney worst gap vs exact " + fmt(mw_gap) + " at sizes " + mw_where;
    if (!failed.empty()) {
        detail += "; failed:";
        for (const auto& f : failed) detail += " " + f;
    }
    return {failed.empty(), detail};
}

Outcome pair_indices() {
    const std::vector<int> a{1, 1, 2, 2}, b{1, 2, 2, 2};
    const double psi = pairwise_similarity_index(a, b), jac = jaccard_coclustering(a, b);
    bool ok = std::abs(psi - 1.0 / 6.0) < 1e-15 && std::abs(jac - 0.25) < 1e-15;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t m = 2 + seed % 50;
        const auto x = support::random_labels(m, 1 + static_cast<int>(seed % 6), seed);
        const auto y = support::random_labels(m, 1 + static_cast<int>((seed / 6) % 6), seed + 31337);
        std::vector<int> renamed(m);
        for (std::size_t i = 0; i < m; ++i) renamed[i] = 7 * x[i] + 3;
        const auto t = support::enumerate_pairs(x, y);
        ok = ok && pairwise_similarity_index(renamed, y) == pairwise_similarity_index(x, y) &&
             jaccard_coclustering(renamed, y) == jaccard_coclustering(x, y) &&
             std::abs(pairwise_similarity_index(x, y) - t.both / t.total) < 1e-15;
    }
    return {ok, "PSI " + fmt(psi) + ", Jaccard " + fmt(jac) + "; 200 relabeled pairs checked"};
}

Outcome planted_recovery() {
    const auto start = Clock::now();
    double recall_sum = 0.0, noise_sum = 0.0;
    int right_count = 0, good_psi = 0;
    std::size_t surviving_noise = 0, flagged_noise = 0;
    std::string per_seed;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        synth::PlantSpec spec;
        spec.m = 400;
        spec.n_informative = 5;
        spec.n_noise = 20;
        spec.n_clusters = 4;
        spec.separation = 6.0;
        spec.binary_fraction = 0.3;
        spec.seed = seed;
        const auto planted = synth::generate_planted(spec);

        pipeline::PipelineConfig config;
        config.necessity.repeats = 100;
        config.seed = seed;
        config.sweep.fit.seed = seed;
        config.necessity.seed = seed;
        pipeline::PipelineResult result;
        try {
            result = pipeline::run_full_pipeline(planted.data, config);
        } catch (const Error& e) {
            per_seed += " seed " + std::to_string(seed) + " failed (" + e.what() + ");";
            continue;
        }
        const auto& selected = result.selection.final_features;
        std::size_t hits = 0, noise_hits = 0;
        for (std::size_t f : selected) {
            if (std::binary_search(planted.informative.begin(), planted.informative.end(), f)) ++hits;
            else ++noise_hits;
        }
        recall_sum += static_cast<double>(hits) / static_cast<double>(planted.informative.size());
        noise_sum += static_cast<double>(noise_hits) / static_cast<double>(planted.noise.size());

        for (const auto& fn : result.necessity.features) {
            if (std::binary_search(planted.noise.begin(), planted.noise.end(), fn.feature)) {
                ++surviving_noise;
                if (!fn.necessary) ++flagged_noise;
            }
        }
        const int nc = result.final_clustering.n_clusters;
        const double psi = pairwise_similarity_index(result.final_clustering.labels, planted.true_labels);
        const double relative = psi / pairwise_similarity_index(planted.true_labels, planted.true_labels);
        if (nc == 4) ++right_count;
        if (nc == 4 && relative >= 0.9) ++good_psi;
        per_seed += " [" + std::to_string(seed) + ": " + std::to_string(hits) + "/5 inf, " + std::to_string(noise_hits) +
                    " noise, n_c " + std::to_string(nc) + ", PSI " + fmt(psi) + " rel " + fmt(relative) + "]";
    }
    const double elapsed = seconds_since(start);
    const double recall = recall_sum / 10.0, noise = noise_sum / 10.0;
    const double flag_share = surviving_noise ? static_cast<double>(flagged_noise) / static_cast<double>(surviving_noise) : 1.0;

    struct Part {
        const char* name;
        bool ok;
        std::string value;
    };
    const Part parts[] = {
        {"recall>=0.8", recall >= 0.8, fmt(recall)},
        {"noise<=0.2", noise <= 0.2, fmt(noise)},
        {"n_c=4 in >=8/10", right_count >= 8, std::to_string(right_count) + "/10"},
        {"n_c=4 with relative PSI>=0.9 in >=8/10", good_psi >= 8, std::to_string(good_psi) + "/10"},
        {"noise flagged>=80%", flag_share >= 0.8,
         std::to_string(flagged_noise) + "/" + std::to_string(surviving_noise)},
        {"runtime<600s", elapsed < 600.0, fmt(elapsed) + " s"},
    };
    bool all_ok = true;
    std::string detail;
    for (const auto& p : parts) {
        all_ok = all_ok && p.ok;
        detail += std::string(p.ok ? "ok " : "MISS ") + p.name + " (" + p.value + "); ";
    }
    return {all_ok, detail + "per seed:" + per_seed};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const fs::path data = scratch / "data", run_a = scratch / "run_a", run_b = scratch / "run_b";
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" --quiet " + args + " > \"" + (scratch / "cli.log").string() + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    if (run("synth --output \"" + data.string() + "\" --m 150 --informative 4 --noise 4 --seed 5") != 0) {
        return {false, "synth command failed"};
    }
    const std::string common = "--input \"" + (data / "data.csv").string() + "\" --schema \"" +
                               (data / "schema.json").string() + "\" --K 3 --repeats 20 --restarts 2 --seed 11";
    if (run("run-all " + common + " --output \"" + run_a.string() + "\"") != 0 ||
        run("run-all " + common + " --output \"" + run_b.string() + "\"") != 0) {
        return {false, "run-all failed: " + slurp(scratch / "cli.log")};
    }
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(run_a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto other = run_b / fs::relative(entry.path(), run_a);
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            return {false, "differs: " + fs::relative(entry.path(), run_a).string()};
        }
    }
    std::size_t files_b = 0;
    for (const auto& entry : fs::recursive_directory_iterator(run_b)) files_b += entry.is_regular_file();
    return {files > 0 && files == files_b, std::to_string(files) + " files byte-identical across two runs"};
}

template <class Fn>
void guarded(int id, const std::string& name, Fn&& fn) {
    try {
        report(id, name, fn());
    } catch (const std::exception& e) {
        report(id, name, {false, std::string("exception: ") + e.what()});
    }
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <phenoclust-cli> <scratch-dir>\n";
        return 2;
    }
    log::set_sink({});
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];

    guarded(1, "glrm gradient check", gradient_check);
    guarded(2, "glrm monotone objective", monotonicity);
    guarded(3, "rank-1 recovery", rank_recovery);
    guarded(4, "shrinkage to zero", shrinkage);
    guarded(5, "pam optimality", pam_oracle);
    guarded(6, "gower properties", gower_properties);
    guarded(7, "silhouette", silhouette_check);
    guarded(8, "statistics oracles", statistics_oracles);
    guarded(9, "pair-counting indices", pair_indices);
    guarded(10, "planted recovery", planted_recovery);
    guarded(11, "determinism", [&] { return determinism(cli, scratch); });

    std::cout << (11 - failures) << "/11 criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
