#pragma once

#include "phenoclust/pipeline.hpp"
#include "phenoclust/run_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace phenoclust::report {

std::vector<std::string> feature_names(const Dataset& data, std::span<const std::size_t> features);

/// Per-fold sweep records and the final feature list, features by name.
nlohmann::json selection_json(const Dataset& data, const pipeline::SelectionResult& selection);

/// row_id, fold
void write_folds_csv(std::ostream& out, const Dataset& data, const pipeline::FoldSpec& folds);

/// Long format: feature, repeat, psi, relative_psi, jaccard.
void write_necessity_csv(std::ostream& out, const Dataset& data, const pipeline::NecessityReport& report);

/// feature, median_psi, median_relative_psi, median_jaccard, necessary.
void write_necessity_summary(std::ostream& out, const Dataset& data, const pipeline::NecessityReport& report);

/// fold, train_psi, train_self_psi, validation_psi, validation_self_psi.
void write_stability_csv(std::ostream& out, std::span<const pipeline::FoldStability> stability);

/// One feature name per line under a "feature" header.
void write_feature_list(std::ostream& out, std::span<const std::string> names);

/// Reads a file written by write_feature_list.
std::vector<std::string> read_feature_list(const std::filesystem::path& path);

/// Reads (row_id, cluster[, ...]) and aligns it with the dataset's rows.
/// Throws DataError("ingestion") on unknown or missing row ids.
Labels read_labels(const std::filesystem::path& path, const Dataset& data);

/// FNV-1a 64-bit digest of a file, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Writes `contents` to dir/name, creating dir, with "\n" line endings.
void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& contents);

/// Manifest contents: tool version, command, seed, config echo, input digests
/// and the list of files written. Stage timings go to the log.
nlohmann::json manifest(const std::string& command, const RunConfig& config, std::span<const std::string> outputs);

/// Writes the full run-all artifact set into config.output.
std::vector<std::string> write_pipeline_outputs(const std::filesystem::path& dir, const RunConfig& config,
                                                const Dataset& data, const PreprocessReport& preprocess,
                                                const pipeline::PipelineResult& result, bool with_dissimilarity);

} // namespace phenoclust::report
