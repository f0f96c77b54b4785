#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bucket/classifier.hpp"
#include "bucket/core.hpp"
#include "bucket/harness.hpp"
#include "bucket/metrics.hpp"

namespace bucket::io {

/// Maps a label token to a Label. Accepts melanoma / not-melanoma and +1 / 1 / -1.
/// Throws DataError(unknown_label).
Label parse_label(std::string_view token);

/// One parsed feature file: header `feature_set,<name>,<dim>` followed by
/// rows `<image_id>,<label>,<v1>,...,<vd>`.
struct FeatureFile {
    std::string name;
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<double> values;  ///< row-major, ids.size() x dim
};

/// Throws DataError with the offending line number on malformed input.
FeatureFile parse_feature_file(std::istream& in, std::string_view source = "<stream>");
FeatureFile read_feature_file(const std::filesystem::path& path);
void write_feature_file(std::ostream& out, const FeatureMatrix& m, const std::vector<std::string>& ids,
                        const std::vector<Label>& labels);

struct ManifestEntry {
    std::filesystem::path path;
    std::optional<std::size_t> dim;
};

/// JSON manifest:
/// {"name": ..., "features": [{"path": ..., "dim": ...}], "image_dir": ..., "augmentation": ...}
/// Relative paths resolve against the manifest's directory.
struct Manifest {
    std::string name;
    std::vector<ManifestEntry> features;
    std::optional<std::filesystem::path> image_dir;
    /// CSV `id,source_id[,k]` naming augmented rows and the original each came from.
    std::optional<std::filesystem::path> augmentation;
};

/// Throws ConfigError for a malformed manifest, DataError when it cannot be read.
Manifest read_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);

/// Loads and aligns all feature files; rows sorted by image id.
LabeledDataset load_dataset(const Manifest& manifest);
/// Aligns already-parsed files (exposed for tests). `augmentation` holds (id, source_id) pairs.
LabeledDataset assemble_dataset(std::vector<FeatureFile> files,
                                const std::vector<std::pair<std::string, std::string>>& augmentation = {});

/// Reads `image_id,label` rows (optional header).
std::vector<std::pair<std::string, Label>> read_labels_csv(const std::filesystem::path& path);

/// Classifier list from a JSON array; see README for the schema. Throws ConfigError.
std::vector<ClassifierConfig> parse_classifier_configs(std::string_view json_text);

enum class ReportFormat { table, csv, jsonl };

/// Renders eight metrics with two decimals, undefined as an em dash.
std::string format_metric_row(const MetricSet& metrics);

/// Aggregate row in TPR TNR PPV NPV ACC F1p F1n MCC order plus one row per iteration.
/// `verbose` adds the prevalence-formula accuracy column.
std::string emit_report(const EvalReport& report, ReportFormat format, bool verbose = false);

/// One parsed machine-format row.
struct ReportRow {
    std::string scope;  ///< "aggregate" or the iteration number
    Confusion confusion;
    std::array<Metric, 8> metrics;
};

/// Parses csv or jsonl output of emit_report.
std::vector<ReportRow> parse_report(std::string_view text, ReportFormat format);

}  // namespace bucket::io
