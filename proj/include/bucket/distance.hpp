#pragma once

#include <span>
#include <vector>

namespace bucket {

enum class RankDistance { spearman, correlation };

/// Fractional ranks (1-based, ties get their average rank).
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson correlation; defined as 0 when either vector is constant.
double pearson(std::span<const double> u, std::span<const double> v);

/// 1 - rho, with rho the Spearman or Pearson correlation. Range [0, 2].
double rank_distance(std::span<const double> u, std::span<const double> v, RankDistance kind);

}  // namespace bucket
