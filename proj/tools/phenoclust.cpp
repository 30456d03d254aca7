// phenoclust command-line driver: preprocess / select / cluster / necessity /
// run-all / synth. Errors are reported as one JSON line on stderr.

#include "phenoclust/clustering.hpp"
#include "phenoclust/csv.hpp"
#include "phenoclust/dataset.hpp"
#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/error.hpp"
#include "phenoclust/log.hpp"
#include "phenoclust/pipeline.hpp"
#include "phenoclust/profile.hpp"
#include "phenoclust/report.hpp"
#include "phenoclust/run_config.hpp"
#include "phenoclust/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace pc = phenoclust;
namespace fs = std::filesystem;

namespace {

constexpr int kExitInternal = 1;

int exit_code(pc::ErrorCategory category) {
    switch (category) {
    case pc::ErrorCategory::Config: return 2;
    case pc::ErrorCategory::Data: return 3;
    case pc::ErrorCategory::Numerical: return 4;
    }
    return kExitInternal;
}

void report_error(std::string_view category, std::string_view kind, std::string_view message) {
    const nlohmann::json line = {{"error", {{"category", category}, {"kind", kind}, {"message", message}}}};
    std::cerr << line.dump() << '\n';
}

/// Flag overrides layered on top of an optional config file.
struct Overrides {
    std::string config_path;
    std::optional<std::string> input, schema, output;
    std::optional<int> folds, n_min, n_max, rank, restarts, repeats;
    std::optional<double> gamma0, gamma_step, necessity_threshold, alpha;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;

    pc::RunConfig resolve() const {
        pc::RunConfig c = config_path.empty() ? pc::RunConfig{} : pc::load_run_config(config_path);
        if (input) c.input = *input;
        if (schema) c.schema = *schema;
        if (output) c.output = *output;
        if (folds) c.folds = *folds;
        if (n_min) c.n_min = *n_min;
        if (n_max) c.n_max = *n_max;
        if (rank) c.rank = *rank;
        if (restarts) c.restarts = *restarts;
        if (repeats) c.repeats = *repeats;
        if (gamma0) c.gamma0 = *gamma0;
        if (gamma_step) c.gamma_step = *gamma_step;
        if (necessity_threshold) c.necessity_threshold = *necessity_threshold;
        if (alpha) c.alpha = *alpha;
        if (seed) c.seed = *seed;
        pc::validate(c);
        return c;
    }
};

void add_io_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration");
    cmd->add_option("--input", o.input, "input CSV");
    cmd->add_option("--schema", o.schema, "JSON schema for the input CSV");
    cmd->add_option("--output", o.output, "output directory");
}

void add_pipeline_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--K", o.folds, "cross-validation folds");
    cmd->add_option("--gamma0", o.gamma0, "initial regularization");
    cmd->add_option("--gamma-step", o.gamma_step, "regularization increment (0 = automatic)");
    cmd->add_option("--n-min", o.n_min, "smallest cluster count");
    cmd->add_option("--n-max", o.n_max, "largest cluster count");
    cmd->add_option("--k", o.rank, "low-rank model rank");
    cmd->add_option("--restarts", o.restarts, "seeded initializations per low-rank fit");
    cmd->add_option("--repeats", o.repeats, "shuffles per feature in the necessity test");
    cmd->add_option("--necessity-threshold", o.necessity_threshold, "median relative PSI at which a feature is unnecessary");
    cmd->add_option("--alpha", o.alpha, "significance level for post-hoc tests");
    cmd->add_option("--seed", o.seed, "seed for every random choice");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

void require(const std::string& value, const char* what) {
    if (value.empty()) throw pc::ConfigError("config", std::string("missing required setting: ") + what);
}

pc::Preprocessed load_input(const pc::RunConfig& c) {
    require(c.input, "input");
    require(c.schema, "schema");
    const auto schema = pc::load_schema(c.schema);
    return pc::preprocess(pc::load_csv(c.input, schema), schema.max_categories);
}

std::vector<std::size_t> resolve_features(const pc::Dataset& data, const std::string& path) {
    if (path.empty()) {
        std::vector<std::size_t> all(data.cols());
        for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
        return all;
    }
    auto idx = data.column_indices(pc::report::read_feature_list(path));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (idx.empty()) throw pc::ConfigError("configuration", "feature list is empty");
    return idx;
}

template <typename Writer>
std::string render(Writer&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void text(const std::string& name, const std::string& contents) {
        pc::report::write_text(dir_, name, contents);
        names_.push_back(name);
    }
    void json(const std::string& name, const nlohmann::json& doc) { text(name, doc.dump(2) + "\n"); }

    void finish(const std::string& command, const pc::RunConfig& config) {
        names_.push_back("manifest.json");
        pc::report::write_text(dir_, "manifest.json", pc::report::manifest(command, config, names_).dump(2) + "\n");
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

std::uint64_t seed_or_default(const pc::RunConfig& c, const char* command) {
    if (!c.seed) pc::log::warn("default_seed", {{"command", command}, {"seed", 0}});
    return c.seed.value_or(0);
}

void cmd_preprocess(const Overrides& o) {
    const auto c = o.resolve();
    require(c.output, "output");
    const auto pre = load_input(c);
    Outputs out(c.output);
    out.text("data.csv", render([&](std::ostream& s) { pc::write_csv(s, pre.data); }));
    out.json("schema.json", pc::to_json(pc::schema_of(pre.data)));
    out.text("columns.csv", render([&](std::ostream& s) { pc::write_column_report(s, pre.data, pre.report); }));
    out.json("preprocess.json", {{"input_rows", pre.report.input_rows},
                                 {"input_columns", pre.report.input_columns},
                                 {"rows", pre.data.rows()},
                                 {"columns", pre.data.cols()},
                                 {"dropped_rows", pre.report.dropped_rows},
                                 {"dropped_columns", pre.report.dropped_columns}});
    out.finish("preprocess", c);
}

void cmd_select(const Overrides& o) {
    const auto c = o.resolve();
    require(c.output, "output");
    const std::uint64_t seed = seed_or_default(c, "select");
    const auto pre = load_input(c);
    auto pcfg = pc::to_pipeline_config(c, o.threads);
    pcfg.sweep.fit.seed = seed;
    const auto folds = pc::pipeline::make_folds(pre.data.rows(), c.folds, seed);
    const auto selection = pc::pipeline::cv_feature_selection(pre.data, folds, pcfg.sweep, o.threads);

    Outputs out(c.output);
    out.json("config.json", pc::to_json(c));
    out.text("folds.csv", render([&](std::ostream& s) { pc::report::write_folds_csv(s, pre.data, folds); }));
    out.json("selection.json", pc::report::selection_json(pre.data, selection));
    out.text("features.csv", render([&](std::ostream& s) {
                 pc::report::write_feature_list(s, pc::report::feature_names(pre.data, selection.final_features));
             }));
    out.finish("select", c);
}

void cmd_cluster(const Overrides& o, const std::string& features_path, const std::string& group_by,
                 bool with_dissimilarity) {
    const auto c = o.resolve();
    require(c.output, "output");
    const auto pre = load_input(c);
    const auto& data = pre.data;
    auto features = resolve_features(data, features_path);
    Outputs out(c.output);
    out.json("config.json", pc::to_json(c));

    pc::Labels labels;
    if (!group_by.empty()) {
        const std::size_t g = data.column_index(group_by);
        features.erase(std::remove(features.begin(), features.end(), g), features.end());
        if (features.empty()) throw pc::ConfigError("configuration", "no features left to profile");
        std::map<double, int> codes;
        for (std::size_t i = 0; i < data.rows(); ++i) codes.emplace(data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)), 0);
        nlohmann::json mapping = nlohmann::json::array();
        int next = 0;
        for (auto& [value, code] : codes) {
            code = next++;
            mapping.push_back({{"group", code}, {"value", value}});
        }
        labels.resize(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) {
            labels[i] = codes.at(data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)));
        }
        out.json("groups.json", {{"column", group_by}, {"groups", mapping}});
        out.text("labels.csv", render([&](std::ostream& s) {
                     pc::csv::write_record(s, {"row_id", "cluster"});
                     for (std::size_t i = 0; i < data.rows(); ++i) {
                         pc::csv::write_record(s, {data.row_ids[i], std::to_string(labels[i])});
                     }
                 }));
    } else {
        const auto d = pc::balanced_gower(data, features);
        const auto best = pc::best_clustering(d, c.n_min, std::min(c.n_max, static_cast<int>(data.rows())));
        labels = best.labels;
        out.text("labels.csv", render([&](std::ostream& s) { pc::write_assignment(s, data.row_ids, best); }));
        out.json("clustering.json", {{"n_clusters", best.n_clusters},
                                     {"silhouette", best.silhouette},
                                     {"cost", best.cost},
                                     {"features", pc::report::feature_names(data, features)}});
        if (with_dissimilarity) out.text("dissimilarity.txt", render([&](std::ostream& s) { pc::write_dense(s, d); }));
    }
    const auto profile = pc::profile_clusters(data, labels, features, c.alpha);
    out.text("profile.csv", render([&](std::ostream& s) { pc::write_profile_csv(s, profile); }));
    out.finish("cluster", c);
}

void cmd_necessity(const Overrides& o, const std::string& features_path, const std::string& labels_path) {
    const auto c = o.resolve();
    require(c.output, "output");
    require(labels_path, "labels");
    const std::uint64_t seed = seed_or_default(c, "necessity");
    const auto pre = load_input(c);
    const auto features = resolve_features(pre.data, features_path);

    pc::ClusterAssignment baseline;
    baseline.labels = pc::report::read_labels(labels_path, pre.data);
    std::vector<int> distinct = baseline.labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    baseline.n_clusters = static_cast<int>(distinct.size());
    if (baseline.n_clusters < 2) throw pc::ConfigError("parameter", "baseline labels must contain at least two clusters");

    pc::pipeline::NecessityOptions options;
    options.repeats = c.repeats;
    options.threshold = c.necessity_threshold;
    options.seed = seed;
    options.threads = o.threads;
    const auto result = pc::pipeline::shuffle_necessity_test(pre.data, features, baseline, options);

    Outputs out(c.output);
    out.json("config.json", pc::to_json(c));
    out.text("necessity.csv", render([&](std::ostream& s) { pc::report::write_necessity_csv(s, pre.data, result); }));
    out.text("necessity_summary.csv",
             render([&](std::ostream& s) { pc::report::write_necessity_summary(s, pre.data, result); }));
    out.finish("necessity", c);
}

void cmd_run_all(const Overrides& o, bool with_dissimilarity) {
    const auto c = o.resolve();
    require(c.output, "output");
    pc::require_seed(c);
    const auto pre = load_input(c);
    const auto result = pc::pipeline::run_full_pipeline(pre.data, pc::to_pipeline_config(c, o.threads));
    pc::report::write_pipeline_outputs(c.output, c, pre.data, pre.report, result, with_dissimilarity);
}

struct SynthArgs {
    pc::synth::PlantSpec spec;
    std::string output;
};

void cmd_synth(const SynthArgs& a) {
    const auto planted = pc::synth::generate_planted(a.spec);
    const auto& data = planted.data;
    Outputs out(a.output);
    out.text("data.csv", render([&](std::ostream& s) {
                 pc::csv::Record header{"row_id"};
                 for (const auto& col : data.columns) header.push_back(col.name);
                 pc::csv::write_record(s, header);
                 for (std::size_t i = 0; i < data.rows(); ++i) {
                     pc::csv::Record rec{data.row_ids[i]};
                     for (std::size_t j = 0; j < data.cols(); ++j) {
                         const auto ii = static_cast<Eigen::Index>(i);
                         const auto jj = static_cast<Eigen::Index>(j);
                         rec.push_back(data.missing(ii, jj) ? "NA" : pc::format_real(data.values(ii, jj)));
                     }
                     pc::csv::write_record(s, rec);
                 }
             }));
    pc::Schema schema;
    schema.id_column = "row_id";
    for (const auto& col : data.columns) schema.columns.emplace_back(col.name, col.kind);
    out.json("schema.json", pc::to_json(schema));
    out.text("truth.csv", render([&](std::ostream& s) {
                 pc::csv::write_record(s, {"row_id", "cluster"});
                 for (std::size_t i = 0; i < data.rows(); ++i) {
                     pc::csv::write_record(s, {data.row_ids[i], std::to_string(planted.true_labels[i])});
                 }
             }));
    out.json("truth.json", {{"informative", pc::report::feature_names(data, planted.informative)},
                            {"noise", pc::report::feature_names(data, planted.noise)},
                            {"m", a.spec.m},
                            {"n_clusters", a.spec.n_clusters},
                            {"separation", a.spec.separation},
                            {"binary_fraction", a.spec.binary_fraction},
                            {"missing_fraction", a.spec.missing_fraction},
                            {"seed", a.spec.seed}});
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phenotype discovery for mixed-type tabular data"};
    app.set_version_flag("--version", std::string(PHENOCLUST_VERSION));
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress log lines on stderr");

    Overrides o;
    std::string features_path, labels_path, group_by;
    bool with_dissimilarity = false;

    auto* pre = app.add_subcommand("preprocess", "consolidate, dummy-code and finalize a CSV");
    add_io_flags(pre, o);

    auto* sel = app.add_subcommand("select", "cross-validated feature selection");
    add_io_flags(sel, o);
    add_pipeline_flags(sel, o);

    auto* clu = app.add_subcommand("cluster", "cluster on a feature list and profile the clusters");
    add_io_flags(clu, o);
    add_pipeline_flags(clu, o);
    clu->add_option("--features", features_path, "feature list CSV (default: all columns)");
    clu->add_option("--group-by", group_by, "profile by this column instead of clustering");
    clu->add_flag("--write-dissimilarity", with_dissimilarity, "also write the dissimilarity matrix");

    auto* nec = app.add_subcommand("necessity", "shuffle test of each feature against baseline labels");
    add_io_flags(nec, o);
    add_pipeline_flags(nec, o);
    nec->add_option("--features", features_path, "feature list CSV (default: all columns)");
    nec->add_option("--labels", labels_path, "baseline labels CSV (row_id, cluster)");

    auto* all = app.add_subcommand("run-all", "selection, necessity, final clustering, stability and profile");
    add_io_flags(all, o);
    add_pipeline_flags(all, o);
    all->add_flag("--write-dissimilarity", with_dissimilarity, "also write the dissimilarity matrix");

    SynthArgs synth_args;
    auto* syn = app.add_subcommand("synth", "generate a planted-cluster dataset");
    syn->add_option("--output", synth_args.output, "output directory")->required();
    syn->add_option("--m", synth_args.spec.m, "rows");
    syn->add_option("--informative", synth_args.spec.n_informative, "informative features");
    syn->add_option("--noise", synth_args.spec.n_noise, "noise features");
    syn->add_option("--clusters", synth_args.spec.n_clusters, "planted clusters");
    syn->add_option("--separation", synth_args.spec.separation, "center spacing in within-cluster sd units");
    syn->add_option("--binary-fraction", synth_args.spec.binary_fraction, "share of binary features");
    syn->add_option("--missing-fraction", synth_args.spec.missing_fraction, "share of masked cells");
    syn->add_option("--seed", synth_args.spec.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("config", "usage", e.what());
        return 2;
    }
    if (quiet) pc::log::set_sink({});

    try {
        if (*pre) cmd_preprocess(o);
        else if (*sel) cmd_select(o);
        else if (*clu) cmd_cluster(o, features_path, group_by, with_dissimilarity);
        else if (*nec) cmd_necessity(o, features_path, labels_path);
        else if (*all) cmd_run_all(o, with_dissimilarity);
        else if (*syn) cmd_synth(synth_args);
    } catch (const pc::Error& e) {
        report_error(pc::to_string(e.category()), e.kind(), e.what());
        return exit_code(e.category());
    } catch (const std::exception& e) {
        report_error("internal", "exception", e.what());
        return kExitInternal;
    }
    return 0;
}
