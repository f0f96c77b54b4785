#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace bucket {

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    Confusion& operator+=(const Confusion& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// An empty optional marks a metric whose denominator is zero.
using Metric = std::optional<double>;

struct MetricSet {
    Metric tpr;
    Metric tnr;
    Metric ppv;
    Metric npv;
    Metric acc;
    Metric f1p;
    Metric f1n;
    Metric mcc;
    /// (TP+FN)/total: the positive-class prevalence. Reported only in verbose output.
    Metric acc_prevalence;

    static constexpr std::array<std::string_view, 8> names{"TPR", "TNR", "PPV", "NPV", "ACC", "F1p", "F1n", "MCC"};
    /// The eight headline metrics in report column order.
    std::array<Metric, 8> ordered() const { return {tpr, tnr, ppv, npv, acc, f1p, f1n, mcc}; }
};

/// Throws ContractViolation when every count is zero.
MetricSet compute_metrics(const Confusion& c);

}  // namespace bucket
