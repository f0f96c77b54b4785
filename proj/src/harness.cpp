#include "bucket/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "bucket/rng.hpp"
#include "bucket/standardizer.hpp"

namespace bucket {
namespace {

/// Runs fn(0..count-1) on up to `workers` threads. Exceptions are rethrown
/// for the lowest failing index so failures are schedule-independent.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) run(i);
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Per-class training counts: Hamilton apportionment of round(ratio*N),
/// kept within [1, n_c - 1] where possible.
std::vector<std::size_t> stratified_counts(const std::vector<std::size_t>& class_sizes, double ratio) {
    std::size_t n = 0;
    for (auto s : class_sizes) n += s;
    const auto total = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

    std::vector<std::size_t> counts(class_sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        double quota = static_cast<double>(total) * static_cast<double>(class_sizes[c]) / static_cast<double>(n);
        counts[c] = static_cast<std::size_t>(std::floor(quota));
        assigned += counts[c];
        remainders.emplace_back(quota - std::floor(quota), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];

    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            // Borrow one from a class that can spare it.
            for (std::size_t o = 0; o < counts.size(); ++o) {
                if (o != c && counts[o] > 1) {
                    --counts[o];
                    ++counts[c];
                    break;
                }
            }
        }
        if (counts[c] >= class_sizes[c] && class_sizes[c] > 1) {
            for (std::size_t o = 0; o < counts.size(); ++o) {
                if (o != c && counts[o] + 1 < class_sizes[o]) {
                    --counts[c];
                    ++counts[o];
                    break;
                }
            }
        }
    }
    return counts;
}

std::vector<SplitPlan> make_splits_impl(const std::vector<std::size_t>& originals, std::span<const Label> labels,
                                        const LabeledDataset* dataset, const PipelineConfig& config) {
    config.validate();
    if (originals.size() < 5) {
        throw DataError(fmt::format("need at least 5 images to split, got {}", originals.size()));
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i : originals) (labels[i] == Label::positive ? pos : neg).push_back(i);
    if (pos.size() < 2 || neg.size() < 2) {
        throw DataError(DataErrorKind::single_class,
                        fmt::format("each class needs at least 2 images (positive {}, negative {})", pos.size(),
                                    neg.size()));
    }
    const auto counts = stratified_counts({pos.size(), neg.size()}, config.split_ratio);

    std::vector<SplitPlan> plans;
    plans.reserve(static_cast<std::size_t>(config.iterations));
    for (int it = 0; it < config.iterations; ++it) {
        SplitPlan plan;
        plan.iteration = it;
        auto split_rng = seeded_rng(config.seed, fmt::format("split/{}", it));
        for (int c = 0; c < 2; ++c) {
            std::vector<std::size_t> members = c == 0 ? pos : neg;
            split_rng.shuffle(std::span(members));
            const std::size_t take = counts[static_cast<std::size_t>(c)];
            plan.train.insert(plan.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
            plan.test.insert(plan.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
        }
        std::sort(plan.train.begin(), plan.train.end());
        std::sort(plan.test.begin(), plan.test.end());

        if (dataset && config.balance && !dataset->augmented_from.empty()) {
            std::size_t train_pos = 0;
            for (std::size_t i : plan.train) train_pos += labels[i] == Label::positive ? 1 : 0;
            const std::size_t train_neg = plan.train.size() - train_pos;
            const Label minority = train_pos < train_neg ? Label::positive : Label::negative;
            const std::size_t deficit = train_pos > train_neg ? train_pos - train_neg : train_neg - train_pos;
            std::vector<std::size_t> candidates;
            for (std::size_t r = 0; r < dataset->size(); ++r) {
                if (!dataset->is_augmented(r) || labels[r] != minority) continue;
                if (std::binary_search(plan.train.begin(), plan.train.end(), *dataset->augmented_from[r])) {
                    candidates.push_back(r);
                }
            }
            auto balance_rng = seeded_rng(config.seed, fmt::format("balance/{}", it));
            balance_rng.shuffle(std::span(candidates));
            candidates.resize(std::min(deficit, candidates.size()));
            std::sort(candidates.begin(), candidates.end());
            plan.augmented = std::move(candidates);
        }

        if (config.bootstrap_train) {
            std::vector<std::size_t> pool = plan.train;
            pool.insert(pool.end(), plan.augmented.begin(), plan.augmented.end());
            auto boot_rng = seeded_rng(config.seed, fmt::format("bootstrap/{}", it));
            // Redraw until both classes are present; vanishingly rare beyond toy sizes.
            while (true) {
                plan.bootstrap.resize(pool.size());
                bool has_pos = false;
                bool has_neg = false;
                for (auto& b : plan.bootstrap) {
                    b = pool[boot_rng.uniform_index(pool.size())];
                    (labels[b] == Label::positive ? has_pos : has_neg) = true;
                }
                if (has_pos && has_neg) break;
            }
            std::sort(plan.bootstrap.begin(), plan.bootstrap.end());
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw ConfigError(fmt::format("split ratio must lie in (0, 1), got {}", split_ratio));
    }
    if (iterations < 1) throw ConfigError(fmt::format("iterations must be >= 1, got {}", iterations));
    if (classifiers.empty()) throw ConfigError("at least one classifier is required");
    for (const auto& c : classifiers) c.validate();
}

std::vector<std::size_t> SplitPlan::training_rows() const {
    if (!bootstrap.empty()) return bootstrap;
    std::vector<std::size_t> rows = train;
    rows.insert(rows.end(), augmented.begin(), augmented.end());
    return rows;
}

std::vector<SplitPlan> make_splits(std::span<const Label> labels, const PipelineConfig& config) {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return make_splits_impl(all, labels, nullptr, config);
}

std::vector<SplitPlan> make_splits(const LabeledDataset& dataset, const PipelineConfig& config) {
    return make_splits_impl(dataset.original_rows(), dataset.labels, &dataset, config);
}

void check_no_leakage(const SplitPlan& plan, const LabeledDataset& dataset) {
    std::vector<char> in_test(dataset.size(), 0);
    for (std::size_t t : plan.test) {
        if (t >= dataset.size() || dataset.is_augmented(t)) {
            throw ContractViolation(fmt::format("iteration {}: invalid test row {}", plan.iteration, t));
        }
        in_test[t] = 1;
    }
    for (std::size_t r : plan.training_rows()) {
        std::size_t origin = dataset.is_augmented(r) ? *dataset.augmented_from[r] : r;
        if (in_test[r] || in_test[origin]) {
            throw ContractViolation(fmt::format("iteration {}: row '{}' leaks into training", plan.iteration,
                                                dataset.ids[origin]));
        }
    }
    auto originals = dataset.original_rows();
    if (plan.train.size() + plan.test.size() != originals.size()) {
        throw ContractViolation(fmt::format("iteration {}: train/test do not cover the dataset", plan.iteration));
    }
    for (std::size_t r : plan.bootstrap) {
        bool ok = std::binary_search(plan.train.begin(), plan.train.end(), r) ||
                  std::binary_search(plan.augmented.begin(), plan.augmented.end(), r);
        if (!ok) throw ContractViolation(fmt::format("iteration {}: bootstrap row outside the training set", plan.iteration));
    }
}

Confusion& tally(Confusion& c, Label truth, Label predicted) {
    if (truth == Label::positive) {
        ++(predicted == Label::positive ? c.tp : c.fn);
    } else {
        ++(predicted == Label::negative ? c.tn : c.fp);
    }
    return c;
}

IterationResult run_iteration(const SplitPlan& plan, const LabeledDataset& dataset, const PipelineConfig& config) {
    config.validate();
    dataset.validate();
    check_no_leakage(plan, dataset);

    const std::size_t n = config.classifiers.size();
    const std::size_t m = dataset.views.size();
    const auto training = plan.training_rows();
    std::vector<Label> train_labels(training.size());
    for (std::size_t k = 0; k < training.size(); ++k) train_labels[k] = dataset.labels[training[k]];
    require_both_classes(train_labels, fmt::format("iteration {} training set", plan.iteration));

    // Standardize each view with training statistics only.
    std::vector<FeatureMatrix> train_views(m);
    std::vector<FeatureMatrix> test_views(m);
    for (std::size_t j = 0; j < m; ++j) {
        FeatureMatrix tr = dataset.views[j].select_rows(training);
        FeatureMatrix te = dataset.views[j].select_rows(plan.test);
        if (config.standardize) {
            auto s = Standardizer::fit(tr);
            tr = s.transform(tr);
            te = s.transform(te);
        }
        train_views[j] = std::move(tr);
        test_views[j] = std::move(te);
    }

    // One cell per (classifier, feature set): fit, then predict every test row.
    const std::size_t t_count = plan.test.size();
    std::vector<std::vector<Prediction>> cell_predictions(n * m);
    parallel_for(n * m, config.workers, [&](std::size_t cell) {
        const std::size_t i = cell / m;
        const std::size_t j = cell % m;
        const auto& cfg = config.classifiers[i];
        TrainOptions options;
        options.seed = seeded_rng(config.seed, fmt::format("kernel-scale/{}/{}", plan.iteration, j)).next_u64();
        try {
            TrainedModel model = train(cfg, train_views[j], train_labels, options);
            auto& preds = cell_predictions[cell];
            preds.reserve(t_count);
            for (std::size_t t = 0; t < t_count; ++t) preds.push_back(predict(model, test_views[j].row(t)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("classifier '{}' on feature set '{}': {}", cfg.name,
                                          dataset.views[j].name(), e.what()));
        } catch (const std::exception& e) {
            throw TrainingError(fmt::format("classifier '{}' on feature set '{}': {}", cfg.name,
                                            dataset.views[j].name(), e.what()));
        }
    });

    IterationResult result;
    result.iteration = plan.iteration;
    result.cell_confusion.assign(n * m, Confusion{});
    result.images.reserve(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        const std::size_t row = plan.test[t];
        const Label truth = dataset.labels[row];
        DecisionRecord record(n, m);
        for (std::size_t cell = 0; cell < n * m; ++cell) {
            const auto& p = cell_predictions[cell][t];
            record.set(cell / m, cell % m, p.decision, p.score);
            tally(result.cell_confusion[cell], truth, p.decision);
        }
        FusionOutcome fusion = fuse(record, config.tie_break);
        tally(result.confusion, truth, fusion.final);
        result.images.push_back({row, truth, std::move(fusion)});
    }
    return result;
}

EvalReport evaluate(const LabeledDataset& dataset, const PipelineConfig& config) {
    config.validate();
    dataset.validate();
    EvalReport report;
    for (const auto& c : config.classifiers) report.classifier_names.push_back(c.name);
    for (const auto& v : dataset.views) report.feature_set_names.push_back(v.name());
    for (const auto& plan : make_splits(dataset, config)) {
        report.iterations.push_back(run_iteration(plan, dataset, config));
        report.aggregate += report.iterations.back().confusion;
    }
    return report;
}

}  // namespace bucket
