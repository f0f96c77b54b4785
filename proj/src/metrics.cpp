#include "bucket/metrics.hpp"

#include <cmath>

#include "bucket/errors.hpp"

namespace bucket {
namespace {

Metric ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

Metric harmonic(Metric a, Metric b) {
    if (!a || !b || *a + *b == 0.0) return std::nullopt;
    return 2.0 * *a * *b / (*a + *b);
}

}  // namespace

MetricSet compute_metrics(const Confusion& c) {
    if (c.total() == 0) throw ContractViolation("compute_metrics: all confusion counts are zero");
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    const double total = tp + fp + tn + fn;

    MetricSet m;
    m.tpr = ratio(tp, tp + fn);
    m.tnr = ratio(tn, tn + fp);
    m.ppv = ratio(tp, tp + fp);
    m.npv = ratio(tn, tn + fn);
    m.acc = (tp + tn) / total;
    m.acc_prevalence = (tp + fn) / total;
    m.f1p = harmonic(m.ppv, m.tpr);
    m.f1n = harmonic(m.npv, m.tnr);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den > 0.0) m.mcc = (tp * tn - fp * fn) / std::sqrt(den);
    return m;
}

}  // namespace bucket
