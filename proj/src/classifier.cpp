#include "bucket/classifier.hpp"

#include <cmath>

#include <fmt/format.h>

namespace bucket {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_kernel_params(const std::string& name, std::optional<double> scale, int degree) {
    if (scale && !(*scale > 0.0 && std::isfinite(*scale))) {
        throw ConfigError(fmt::format("{}: kernel scale must be positive", name));
    }
    if (degree < 1) throw ConfigError(fmt::format("{}: polynomial degree must be >= 1", name));
}

KernelSpec resolve(KernelType type, std::optional<double> scale, int degree, const FeatureMatrix& rows,
                   const TrainOptions& options) {
    return KernelSpec{type, scale ? *scale : resolve_kernel_scale(rows, options.seed), degree};
}

}  // namespace

void ClassifierConfig::validate() const {
    std::visit(Overloaded{
                   [&](const SvmConfig& c) {
                       check_kernel_params(name, c.kernel_scale, c.degree);
                       if (!(c.box > 0.0)) throw ConfigError(fmt::format("{}: box constraint must be positive", name));
                       if (c.max_iter < 1) throw ConfigError(fmt::format("{}: max_iter must be >= 1", name));
                       if (!(c.tolerance > 0.0)) throw ConfigError(fmt::format("{}: tolerance must be positive", name));
                   },
                   [&](const LlpConfig& c) {
                       check_kernel_params(name, c.kernel_scale, c.degree);
                       if (!(c.regularization > 0.0)) {
                           throw ConfigError(fmt::format("{}: regularization must be positive", name));
                       }
                       if (c.max_iter < 1) throw ConfigError(fmt::format("{}: max_iter must be >= 1", name));
                       if (!std::isfinite(c.init)) throw ConfigError(fmt::format("{}: init must be finite", name));
                   },
                   [&](const KnnConfig& c) {
                       if (c.neighbors < 1) throw ConfigError(fmt::format("{}: neighbors must be >= 1", name));
                   },
               },
               params);
}

std::vector<ClassifierConfig> default_bucket() {
    SvmConfig poly;
    poly.kernel = KernelType::polynomial;
    SvmConfig gauss;
    gauss.kernel = KernelType::gaussian;
    LlpConfig llp;
    KnnConfig knn3{3, RankDistance::spearman};
    KnnConfig knn4{4, RankDistance::correlation};
    return {
        {"svm-polynomial", poly},
        {"svm-gaussian", gauss},
        {"llp-rbf", llp},
        {"knn3-spearman", knn3},
        {"knn4-correlation", knn4},
    };
}

Prediction prediction_from_probability(double p) {
    if (p >= 0.5) return {Label::positive, p};
    return {Label::negative, 1.0 - p};
}

TrainedModel train(const ClassifierConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const TrainOptions& options) {
    config.validate();
    if (rows.rows() != labels.size()) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("{}: {} rows but {} labels", config.name, rows.rows(), labels.size()));
    }
    bool pos = false;
    bool neg = false;
    for (Label l : labels) {
        pos |= l == Label::positive;
        neg |= l == Label::negative;
    }
    if (!pos || !neg) throw TrainingError(fmt::format("{}: training set holds a single class", config.name));

    TrainedModel out;
    out.name = config.name;
    out.dims = rows.cols();
    out.model = std::visit(
        Overloaded{
            [&](const SvmConfig& c) -> decltype(out.model) {
                return train_svm(c, rows, labels, resolve(c.kernel, c.kernel_scale, c.degree, rows, options));
            },
            [&](const LlpConfig& c) -> decltype(out.model) {
                return train_llp(c, rows, labels, resolve(c.kernel, c.kernel_scale, c.degree, rows, options));
            },
            [&](const KnnConfig& c) -> decltype(out.model) {
                if (static_cast<std::size_t>(c.neighbors) > rows.rows()) {
                    throw ConfigError(fmt::format("{}: {} neighbors but only {} training rows", config.name,
                                                  c.neighbors, rows.rows()));
                }
                return train_knn(c, rows, labels);
            },
        },
        config.params);
    return out;
}

Prediction predict(const TrainedModel& model, std::span<const double> row) {
    if (row.size() != model.dims) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("{}: row has {} values, model expects {}", model.name, row.size(), model.dims));
    }
    return std::visit(
        Overloaded{
            [&](const SvmModel& m) {
                return prediction_from_probability(m.calibration.positive_probability(m.decision_value(row)));
            },
            [&](const LlpModel& m) {
                return prediction_from_probability(m.calibration.positive_probability(m.decision_value(row)));
            },
            [&](const KnnModel& m) {
                auto nn = m.neighbors(row);
                std::size_t pos_votes = 0;
                for (std::size_t idx : nn) pos_votes += m.train_labels[idx] == Label::positive ? 1 : 0;
                const std::size_t neg_votes = nn.size() - pos_votes;
                Label decision;
                if (pos_votes != neg_votes) {
                    decision = pos_votes > neg_votes ? Label::positive : Label::negative;
                } else {
                    decision = m.train_labels[nn.front()];
                }
                std::size_t votes = decision == Label::positive ? pos_votes : neg_votes;
                return Prediction{decision, static_cast<double>(votes) / static_cast<double>(nn.size())};
            },
        },
        model.model);
}

}  // namespace bucket
