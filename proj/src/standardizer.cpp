#include "bucket/standardizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bucket {

Standardizer Standardizer::fit(const FeatureMatrix& train_rows) {
    const std::size_t n = train_rows.rows();
    const std::size_t d = train_rows.cols();
    if (n < 2) {
        throw ConfigError(fmt::format("standardizer needs at least 2 rows, got {}", n));
    }
    Standardizer s;
    s.mean_.assign(d, 0.0);
    s.stddev_.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = train_rows.row(i);
        for (std::size_t j = 0; j < d; ++j) s.mean_[j] += r[j];
    }
    for (double& m : s.mean_) m /= static_cast<double>(n);
    // Two-pass variance.
    for (std::size_t i = 0; i < n; ++i) {
        auto r = train_rows.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            double c = r[j] - s.mean_[j];
            s.stddev_[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        double sd = std::sqrt(s.stddev_[j] / static_cast<double>(n));
        // Deviations at round-off level of the mean are treated as constant.
        if (sd <= 1e-12 * std::max(1.0, std::abs(s.mean_[j]))) sd = 0.0;
        s.stddev_[j] = sd;
    }
    return s;
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
    if (row.size() != dims()) throw DataError(DataErrorKind::dimension_mismatch, "standardizer: row width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = stddev_[j] == 0.0 ? 0.0 : (row[j] - mean_[j]) / stddev_[j];
    }
    return out;
}

FeatureMatrix Standardizer::transform(const FeatureMatrix& m) const {
    if (m.cols() != dims()) throw DataError(DataErrorKind::dimension_mismatch, "standardizer: matrix width mismatch");
    std::vector<double> out;
    out.reserve(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto t = transform(m.row(i));
        out.insert(out.end(), t.begin(), t.end());
    }
    return FeatureMatrix(m.name(), m.rows(), m.cols(), std::move(out));
}

std::vector<double> Standardizer::inverse(std::span<const double> row) const {
    if (row.size() != dims()) throw DataError(DataErrorKind::dimension_mismatch, "standardizer: row width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = stddev_[j] == 0.0 ? mean_[j] : row[j] * stddev_[j] + mean_[j];
    }
    return out;
}

}  // namespace bucket
