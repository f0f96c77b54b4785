#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "bucket/classifier.hpp"

namespace bucket {

KnnModel train_knn(const KnnConfig& config, const FeatureMatrix& rows, std::span<const Label> labels) {
    KnnModel model;
    model.config = config;
    model.train_rows = rows;
    model.train_labels.assign(labels.begin(), labels.end());
    if (config.distance == RankDistance::spearman) {
        model.train_ranks.reserve(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) model.train_ranks.push_back(average_ranks(rows.row(i)));
    }
    return model;
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
    const std::size_t n = train_rows.rows();
    std::vector<std::pair<double, std::size_t>> dist(n);
    if (config.distance == RankDistance::spearman) {
        auto rx = average_ranks(x);
        for (std::size_t i = 0; i < n; ++i) dist[i] = {1.0 - pearson(rx, train_ranks[i]), i};
    } else {
        for (std::size_t i = 0; i < n; ++i) dist[i] = {rank_distance(x, train_rows.row(i), config.distance), i};
    }
    const auto k = static_cast<std::size_t>(config.neighbors);
    std::sort(dist.begin(), dist.end());
    // Distances that agree to round-off are ties: reorder each such run by row index.
    for (std::size_t start = 0; start < k;) {
        std::size_t end = start + 1;
        while (end < n && dist[end].first - dist[start].first <= kDistanceTieTolerance) ++end;
        std::sort(dist.begin() + static_cast<std::ptrdiff_t>(start), dist.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        start = end;
    }
    std::vector<std::size_t> out(k);
    for (std::size_t t = 0; t < k; ++t) out[t] = dist[t].second;
    return out;
}

}  // namespace bucket
