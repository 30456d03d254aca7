#include "phenoclust/report.hpp"

#include "phenoclust/csv.hpp"
#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/error.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

namespace phenoclust::report {
namespace {

nlohmann::json trace_json(std::span<const pipeline::SweepStep> trace) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& step : trace) {
        out.push_back({{"gamma", step.gamma},
                       {"n_features", step.n_features},
                       {"best_silhouette", step.best_score},
                       {"best_n_clusters", step.best_n_c},
                       {"improved", step.improved}});
    }
    return out;
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

} // namespace

std::vector<std::string> feature_names(const Dataset& data, std::span<const std::size_t> features) {
    std::vector<std::string> names;
    names.reserve(features.size());
    for (std::size_t f : features) names.push_back(data.columns.at(f).name);
    return names;
}

nlohmann::json selection_json(const Dataset& data, const pipeline::SelectionResult& selection) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& fold : selection.per_fold) {
        folds.push_back({{"fold", fold.fold},
                         {"train_rows", fold.train_rows.size()},
                         {"validation_rows", fold.validation_rows.size()},
                         {"gamma_step", fold.gamma_step},
                         {"best_gamma", fold.best_gamma},
                         {"best_silhouette", fold.best_score},
                         {"best_n_clusters", fold.best_n_c},
                         {"train_features", feature_names(data, fold.train_features)},
                         {"validation_features", feature_names(data, fold.validation_features)},
                         {"validation_silhouette", fold.validation_score},
                         {"validation_n_clusters", fold.validation_n_c},
                         {"sweep", trace_json(fold.trace)}});
    }
    return {{"folds", folds}, {"final_features", feature_names(data, selection.final_features)}};
}

void write_folds_csv(std::ostream& out, const Dataset& data, const pipeline::FoldSpec& folds) {
    csv::write_record(out, {"row_id", "fold"});
    for (std::size_t i = 0; i < data.rows(); ++i) {
        csv::write_record(out, {data.row_ids[i], std::to_string(folds.assignment.at(i))});
    }
}

void write_necessity_csv(std::ostream& out, const Dataset& data, const pipeline::NecessityReport& report) {
    csv::write_record(out, {"feature", "repeat", "psi", "relative_psi", "jaccard"});
    for (const auto& fn : report.features) {
        const std::string& name = data.columns.at(fn.feature).name;
        for (std::size_t r = 0; r < fn.psi.size(); ++r) {
            const double relative = report.baseline_self_psi > 0.0 ? fn.psi[r] / report.baseline_self_psi : 1.0;
            csv::write_record(out, {name, std::to_string(r), format_real(fn.psi[r]), format_real(relative),
                                    format_real(fn.jaccard[r])});
        }
    }
}

void write_necessity_summary(std::ostream& out, const Dataset& data, const pipeline::NecessityReport& report) {
    csv::write_record(out, {"feature", "median_psi", "median_relative_psi", "median_jaccard", "necessary"});
    for (const auto& fn : report.features) {
        csv::write_record(out, {data.columns.at(fn.feature).name, format_real(fn.median_psi),
                                format_real(fn.median_relative_psi), format_real(fn.median_jaccard),
                                fn.necessary ? "true" : "false"});
    }
}

void write_stability_csv(std::ostream& out, std::span<const pipeline::FoldStability> stability) {
    csv::write_record(out, {"fold", "train_psi", "train_self_psi", "validation_psi", "validation_self_psi"});
    for (const auto& s : stability) {
        csv::write_record(out, {std::to_string(s.fold), format_real(s.train_psi), format_real(s.train_self_psi),
                                format_real(s.validation_psi), format_real(s.validation_self_psi)});
    }
}

void write_feature_list(std::ostream& out, std::span<const std::string> names) {
    csv::write_record(out, {"feature"});
    for (const auto& name : names) csv::write_record(out, {name});
}

std::vector<std::string> read_feature_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("ingestion", "cannot open feature list " + path.string());
    const auto records = csv::parse(in);
    if (records.empty() || records.front().empty() || records.front().front() != "feature") {
        throw DataError("ingestion", "feature list " + path.string() + " must start with a 'feature' header");
    }
    std::vector<std::string> names;
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].empty() || records[r].front().empty()) continue;
        names.push_back(records[r].front());
    }
    return names;
}

Labels read_labels(const std::filesystem::path& path, const Dataset& data) {
    std::ifstream in(path);
    if (!in) throw DataError("ingestion", "cannot open label file " + path.string());
    const auto records = csv::parse(in);
    if (records.empty() || records.front().size() < 2) {
        throw DataError("ingestion", "label file " + path.string() + " needs row_id and cluster columns");
    }
    std::unordered_map<std::string, int> by_id;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() < 2) throw DataError("ingestion", "label file row " + std::to_string(r) + " is too short");
        int value = 0;
        try {
            std::size_t used = 0;
            value = std::stoi(rec[1], &used);
            if (used != rec[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("ingestion", "label file row " + std::to_string(r) + " has a non-integer cluster");
        }
        by_id[rec[0]] = value;
    }
    Labels labels(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto it = by_id.find(data.row_ids[i]);
        if (it == by_id.end()) throw DataError("ingestion", "no label for row '" + data.row_ids[i] + "'");
        labels[i] = it->second;
    }
    return labels;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("ingestion", "cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& contents) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("output", "cannot create output directory " + dir.string() + ": " + ec.message());
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("output", "cannot write " + (dir / name).string());
    out << contents;
    if (!out) throw ConfigError("output", "failed while writing " + (dir / name).string());
}

nlohmann::json manifest(const std::string& command, const RunConfig& config, std::span<const std::string> outputs) {
    nlohmann::json inputs = nlohmann::json::object();
    if (!config.input.empty()) inputs["data"] = {{"path", config.input}, {"fnv1a64", file_digest(config.input)}};
    if (!config.schema.empty()) inputs["schema"] = {{"path", config.schema}, {"fnv1a64", file_digest(config.schema)}};
    return {{"tool", "phenoclust"},
            {"version", PHENOCLUST_VERSION},
            {"command", command},
            {"seed", config.seed ? nlohmann::json(*config.seed) : nlohmann::json(nullptr)},
            {"config", to_json(config)},
            {"inputs", inputs},
            {"outputs", std::vector<std::string>(outputs.begin(), outputs.end())}};
}

std::vector<std::string> write_pipeline_outputs(const std::filesystem::path& dir, const RunConfig& config,
                                                const Dataset& data, const PreprocessReport& preprocess,
                                                const pipeline::PipelineResult& result, bool with_dissimilarity) {
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& contents) {
        write_text(dir, name, contents);
        written.push_back(name);
    };
    auto table = [&](const std::string& name, auto&& writer) {
        std::ostringstream out;
        writer(out);
        emit(name, out.str());
    };

    emit("config.json", dump(to_json(config)));
    table("columns.csv", [&](std::ostream& out) { write_column_report(out, data, preprocess); });
    table("folds.csv", [&](std::ostream& out) { write_folds_csv(out, data, result.folds); });
    emit("selection.json", dump(selection_json(data, result.selection)));
    table("features.csv", [&](std::ostream& out) {
        write_feature_list(out, feature_names(data, result.surviving_features));
    });
    table("baseline_labels.csv",
          [&](std::ostream& out) { write_assignment(out, data.row_ids, result.baseline); });
    table("necessity.csv", [&](std::ostream& out) { write_necessity_csv(out, data, result.necessity); });
    table("necessity_summary.csv", [&](std::ostream& out) { write_necessity_summary(out, data, result.necessity); });
    table("labels.csv", [&](std::ostream& out) { write_assignment(out, data.row_ids, result.final_clustering); });
    table("stability.csv", [&](std::ostream& out) { write_stability_csv(out, result.stability); });
    table("profile.csv", [&](std::ostream& out) { write_profile_csv(out, result.profile); });
    emit("clustering.json", dump({{"n_clusters", result.final_clustering.n_clusters},
                                  {"silhouette", result.final_clustering.silhouette},
                                  {"cost", result.final_clustering.cost},
                                  {"features", feature_names(data, result.surviving_features)},
                                  {"sizes", result.profile.sizes}}));
    if (with_dissimilarity) {
        table("dissimilarity.txt", [&](std::ostream& out) {
            write_dense(out, balanced_gower(data, result.surviving_features));
        });
    }
    written.push_back("manifest.json");
    write_text(dir, "manifest.json", dump(manifest("run-all", config, written)));
    return written;
}

} // namespace phenoclust::report
