// bucket-ensemble: command-line front end for the classification pipeline.
//
// Exit codes: 0 success, 2 data error, 3 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bucket/balance.hpp"
#include "bucket/harness.hpp"
#include "bucket/io.hpp"

namespace fs = std::filesystem;
using namespace bucket;

namespace {

constexpr int kExitData = 2;
constexpr int kExitConfig = 3;

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunOptions {
    std::string manifest;
    std::uint64_t seed = 0;
    int iterations = 10;
    double split = 0.8;
    bool no_bootstrap = false;
    bool no_standardize = false;
    bool no_balance = false;
    std::string tie_break = "prefer-positive";
    std::string report = "table";
    std::string config;
    unsigned workers = 1;
    bool verbose = false;
};

int cmd_run(const RunOptions& o) {
    PipelineConfig cfg;
    cfg.seed = o.seed;
    cfg.iterations = o.iterations;
    cfg.split_ratio = o.split;
    cfg.bootstrap_train = !o.no_bootstrap;
    cfg.standardize = !o.no_standardize;
    cfg.balance = !o.no_balance;
    cfg.workers = o.workers;
    cfg.tie_break = o.tie_break == "lowest-index" ? TieBreak::lowest_index : TieBreak::prefer_positive;
    if (!o.config.empty()) cfg.classifiers = io::parse_classifier_configs(read_file(o.config));
    cfg.validate();

    const std::map<std::string, io::ReportFormat> formats{
        {"table", io::ReportFormat::table}, {"csv", io::ReportFormat::csv}, {"jsonl", io::ReportFormat::jsonl}};

    auto dataset = io::load_dataset(io::read_manifest(o.manifest));
    auto report = evaluate(dataset, cfg);
    std::cout << io::emit_report(report, formats.at(o.report), o.verbose);
    return 0;
}

int cmd_validate(const std::string& manifest_path) {
    auto manifest = io::read_manifest(manifest_path);
    auto ds = io::load_dataset(manifest);
    std::size_t pos = 0;
    for (Label l : ds.labels) pos += l == Label::positive ? 1 : 0;
    std::size_t augmented = ds.size() - ds.original_rows().size();
    std::cout << fmt::format("dataset '{}': {} images ({} melanoma, {} not-melanoma), {} augmented\n", manifest.name,
                             ds.size(), pos, ds.size() - pos, augmented);
    for (const auto& v : ds.views) std::cout << fmt::format("  {} : {} x {}\n", v.name(), v.rows(), v.cols());
    return 0;
}

int cmd_balance(const std::string& images, const std::string& labels_path, const std::string& out_dir,
                std::uint64_t seed) {
    auto rows = io::read_labels_csv(labels_path);
    std::vector<std::string> ids;
    std::vector<Label> labels;
    for (auto& [id, l] : rows) {
        ids.push_back(id);
        labels.push_back(l);
    }
    auto plan = plan_balance(ids, labels, seed);
    fs::create_directories(out_dir);

    std::ofstream labels_out(fs::path(out_dir) / "labels.csv");
    std::ofstream aug_out(fs::path(out_dir) / "augmentation.csv");
    labels_out << "image_id,label\n";
    aug_out << "id,source_id,k\n";
    auto token = [](Label l) { return l == Label::positive ? "melanoma" : "not-melanoma"; };
    // Originals are copied so the output directory is a complete image set.
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto name = ids[i] + ".ppm";
        fs::copy_file(fs::path(images) / name, fs::path(out_dir) / name, fs::copy_options::overwrite_existing);
        labels_out << ids[i] << ',' << token(labels[i]) << '\n';
    }

    for (std::size_t c = 0; c < plan.assignments.size(); ++c) {
        const auto& a = plan.assignments[c];
        auto image = read_ppm(fs::path(images) / (ids[a.source] + ".ppm"));
        auto result = kmeans_colors(image, a.k, seed ^ (0x9e3779b97f4a7c15ULL * (c + 1)));
        write_ppm(fs::path(out_dir) / (a.output_id + ".ppm"), result.quantized);
        labels_out << a.output_id << ',' << token(labels[a.source]) << '\n';
        aug_out << a.output_id << ',' << ids[a.source] << ',' << a.k << '\n';
    }
    std::cout << fmt::format("minority {}: {} augmented images written to {}\n", to_int(plan.minority),
                             plan.assignments.size(), out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bucket-of-classifiers ensemble over transfer-learning feature sets"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Evaluate the ensemble under repeated stratified splits");
    run_cmd->add_option("--manifest", run.manifest, "Dataset manifest (JSON)")->required();
    run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_option("--iterations", run.iterations, "Number of split iterations")->check(CLI::PositiveNumber);
    run_cmd->add_option("--split", run.split, "Training fraction")->check(CLI::Range(0.0, 1.0));
    bool bootstrap_flag = true;
    run_cmd->add_flag("--bootstrap-train,!--no-bootstrap-train", bootstrap_flag,
                      "Resample the training set with replacement (default on)");
    run_cmd->add_flag("--no-standardize", run.no_standardize, "Skip z-score standardization");
    run_cmd->add_flag("--no-balance", run.no_balance, "Ignore augmented rows");
    run_cmd->add_option("--tie-break", run.tie_break, "Modal tie rule")
        ->check(CLI::IsMember({"prefer-positive", "lowest-index"}));
    run_cmd->add_option("--report", run.report, "Report format")->check(CLI::IsMember({"table", "csv", "jsonl"}));
    run_cmd->add_option("--config", run.config, "Classifier list (JSON)");
    run_cmd->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--verbose", run.verbose, "Also print the prevalence-formula accuracy");

    std::string images;
    std::string labels;
    std::string out_dir;
    std::uint64_t balance_seed = 0;
    auto* balance_cmd = app.add_subcommand("balance", "Augment the minority class with k-means color variants");
    balance_cmd->add_option("--images", images, "Directory of <id>.ppm images")->required();
    balance_cmd->add_option("--labels", labels, "CSV of image_id,label")->required();
    balance_cmd->add_option("--out", out_dir, "Output directory")->required();
    balance_cmd->add_option("--seed", balance_seed, "Random seed");

    std::string validate_manifest;
    auto* validate_cmd = app.add_subcommand("validate", "Check a manifest and its feature files");
    validate_cmd->add_option("--manifest", validate_manifest, "Dataset manifest (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) {
            run.no_bootstrap = !bootstrap_flag;
            return cmd_run(run);
        }
        if (*balance_cmd) return cmd_balance(images, labels, out_dir, balance_seed);
        if (*validate_cmd) return cmd_validate(validate_manifest);
    } catch (const DataError& e) {
        std::cerr << "data error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return kExitData;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
