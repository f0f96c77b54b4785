#pragma once

#include <cstdint>
#include <span>

#include "bucket/core.hpp"

namespace bucket {

enum class KernelType { polynomial, gaussian, rbf };

/// A kernel with its scale already resolved.
struct KernelSpec {
    KernelType type = KernelType::gaussian;
    double scale = 1.0;
    int degree = 3;
};

/// polynomial: (1 + u.v / s^2)^degree; gaussian and rbf: exp(-|u-v|^2 / (2 s^2)).
double kernel(std::span<const double> u, std::span<const double> v, const KernelSpec& spec);

/// Median pairwise Euclidean distance over a seeded subsample of at most
/// `max_rows` rows. Falls back to 1.0 when the median is 0.
/// Throws ConfigError for fewer than 2 rows.
double resolve_kernel_scale(const FeatureMatrix& train_rows, std::uint64_t seed = 0,
                            std::size_t max_rows = 256);

}  // namespace bucket
