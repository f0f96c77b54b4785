#pragma once

#include <span>
#include <vector>

#include "bucket/core.hpp"

namespace bucket {

/// Per-dimension z-score transform fitted on training rows.
///
/// Uses the population (divide-by-N) standard deviation. Constant dimensions
/// are flagged and map to 0.
class Standardizer {
public:
    /// Throws ConfigError when fewer than 2 rows are given.
    static Standardizer fit(const FeatureMatrix& train_rows);

    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& stddev() const noexcept { return stddev_; }
    bool is_constant(std::size_t dim) const { return stddev_[dim] == 0.0; }
    std::size_t dims() const noexcept { return mean_.size(); }

    std::vector<double> transform(std::span<const double> row) const;
    FeatureMatrix transform(const FeatureMatrix& m) const;
    /// Inverse transform; constant dimensions come back as their mean.
    std::vector<double> inverse(std::span<const double> row) const;

private:
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

inline Standardizer fit_standardizer(const FeatureMatrix& train_rows) {
    return Standardizer::fit(train_rows);
}

}  // namespace bucket
