#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bucket/classifier.hpp"
#include "bucket/core.hpp"
#include "bucket/ensemble.hpp"
#include "bucket/metrics.hpp"

namespace bucket {

struct PipelineConfig {
    double split_ratio = 0.8;
    int iterations = 10;
    std::uint64_t seed = 0;
    std::vector<ClassifierConfig> classifiers = default_bucket();
    bool standardize = true;
    TieBreak tie_break = TieBreak::prefer_positive;
    /// Resample the training set with replacement before fitting.
    bool bootstrap_train = true;
    /// Add augmented minority rows (whose source is in the training split) until the training split is balanced.
    bool balance = true;
    /// Threads used to train and evaluate the classifier/feature-set cells.
    unsigned workers = 1;

    /// Throws ConfigError.
    void validate() const;
};

struct SplitPlan {
    int iteration = 0;
    /// Original rows, ascending.
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    /// Augmented rows added to balance the training split.
    std::vector<std::size_t> augmented;
    /// With-replacement resample of train + augmented; empty when disabled.
    std::vector<std::size_t> bootstrap;

    /// The multiset classifiers are fitted on.
    std::vector<std::size_t> training_rows() const;
};

/// Stratified splits over labels with no augmented rows.
std::vector<SplitPlan> make_splits(std::span<const Label> labels, const PipelineConfig& config);
/// Stratified splits over the dataset's original rows, attaching augmented rows to the training side.
std::vector<SplitPlan> make_splits(const LabeledDataset& dataset, const PipelineConfig& config);

/// Throws ContractViolation when a training row, or the source of an augmented
/// training row, is also a test row, or when train/test do not partition the original rows.
void check_no_leakage(const SplitPlan& plan, const LabeledDataset& dataset);

struct ImageOutcome {
    std::size_t row = 0;
    Label truth = Label::positive;
    FusionOutcome fusion;
};

struct IterationResult {
    int iteration = 0;
    std::vector<ImageOutcome> images;
    Confusion confusion;
    /// Confusion of each single (classifier, feature set) cell, classifier-major.
    std::vector<Confusion> cell_confusion;
};

Confusion& tally(Confusion& c, Label truth, Label predicted);

IterationResult run_iteration(const SplitPlan& plan, const LabeledDataset& dataset, const PipelineConfig& config);

struct EvalReport {
    std::vector<std::string> classifier_names;
    std::vector<std::string> feature_set_names;
    std::vector<IterationResult> iterations;
    /// Counts summed over iterations.
    Confusion aggregate;

    const Confusion& cell_confusion(std::size_t iteration, std::size_t classifier, std::size_t feature_set) const {
        return iterations[iteration].cell_confusion[classifier * feature_set_names.size() + feature_set];
    }
};

EvalReport evaluate(const LabeledDataset& dataset, const PipelineConfig& config);

}  // namespace bucket
