#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bucket/calibration.hpp"
#include "bucket/core.hpp"
#include "bucket/distance.hpp"
#include "bucket/kernel.hpp"

namespace bucket {

/// Kernel SVM trained by SMO. `kernel_scale` empty means "auto".
struct SvmConfig {
    KernelType kernel = KernelType::gaussian;
    std::optional<double> kernel_scale;
    int degree = 3;
    double box = 1.0;
    int max_iter = 10000;
    double tolerance = 1e-3;
};

/// Kernel logistic regression occupying the LLP slot of the bucket.
struct LlpConfig {
    KernelType kernel = KernelType::rbf;
    std::optional<double> kernel_scale;
    int degree = 3;
    double regularization = 1.0;
    int max_iter = 1000;
    double init = 0.0;
    double gradient_tolerance = 1e-6;
};

inline constexpr double kDistanceTieTolerance = 1e-12;

struct KnnConfig {
    int neighbors = 3;
    RankDistance distance = RankDistance::spearman;
};

enum class ClassifierKind { svm, llp, knn };

struct ClassifierConfig {
    std::string name;
    std::variant<SvmConfig, LlpConfig, KnnConfig> params;

    ClassifierKind kind() const noexcept { return static_cast<ClassifierKind>(params.index()); }
    /// Throws ConfigError on out-of-range parameters.
    void validate() const;
};

/// The five configurations of the default classifier bucket, in order:
/// SVM polynomial, SVM gaussian, LLP rbf, KNN k=3 spearman, KNN k=4 correlation.
std::vector<ClassifierConfig> default_bucket();

/// Hard decision plus posterior score of the decided class.
struct Prediction {
    Label decision = Label::positive;
    double score = 0.5;
};

struct SvmModel {
    SvmConfig config;
    KernelSpec kernel;
    std::vector<std::vector<double>> support_vectors;
    /// alpha_i * y_i for each support vector.
    std::vector<double> coefficients;
    double bias = 0.0;
    SigmoidCalibration calibration;

    // Full dual state over the training rows, kept for inspection.
    std::vector<double> alpha;
    std::vector<Label> train_labels;
    int iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;

    double decision_value(std::span<const double> x) const;
};

struct LlpModel {
    LlpConfig config;
    KernelSpec kernel;
    std::vector<std::vector<double>> train_rows;
    std::vector<double> weights;
    SigmoidCalibration calibration;
    int iterations = 0;
    double gradient_norm = 0.0;

    double decision_value(std::span<const double> x) const;
};

struct KnnModel {
    KnnConfig config;
    FeatureMatrix train_rows;
    std::vector<Label> train_labels;
    /// Per-row average ranks when the distance is spearman.
    std::vector<std::vector<double>> train_ranks;

    /// Indices of the k nearest training rows, ordered by (distance, index).
    /// Distances within kDistanceTieTolerance of each other count as equal.
    std::vector<std::size_t> neighbors(std::span<const double> x) const;
};

struct TrainedModel {
    std::string name;
    std::size_t dims = 0;
    std::variant<SvmModel, LlpModel, KnnModel> model;
};

/// Options shared by every classifier during fitting.
struct TrainOptions {
    /// Seed for the kernel-scale subsample.
    std::uint64_t seed = 0;
};

/// Fits one classifier. Throws TrainingError for single-class data and
/// DataError / ConfigError for bad inputs.
TrainedModel train(const ClassifierConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const TrainOptions& options = {});

/// Throws DataError on a dimensionality mismatch.
Prediction predict(const TrainedModel& model, std::span<const double> row);

/// Turns P(+1) into a prediction; exactly 0.5 resolves to +1.
Prediction prediction_from_probability(double positive_probability);

// Solvers behind `train`, exposed for testing.
SvmModel train_svm(const SvmConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const KernelSpec& kernel);
LlpModel train_llp(const LlpConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const KernelSpec& kernel);
KnnModel train_knn(const KnnConfig& config, const FeatureMatrix& rows, std::span<const Label> labels);

/// Gradient of the regularized logistic loss w.r.t. the kernel weights.
std::vector<double> llp_gradient(std::span<const double> gram, std::span<const Label> labels,
                                 std::span<const double> weights, double regularization);

}  // namespace bucket
