#include "bucket/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "bucket/rng.hpp"

namespace bucket {

double kernel(std::span<const double> u, std::span<const double> v, const KernelSpec& spec) {
    const double s2 = spec.scale * spec.scale;
    if (spec.type == KernelType::polynomial) {
        double dot = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
        return std::pow(1.0 + dot / s2, spec.degree);
    }
    double sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        double diff = u[k] - v[k];
        sq += diff * diff;
    }
    return std::exp(-sq / (2.0 * s2));
}

double resolve_kernel_scale(const FeatureMatrix& train_rows, std::uint64_t seed, std::size_t max_rows) {
    const std::size_t n = train_rows.rows();
    if (n < 2) {
        throw ConfigError(fmt::format("kernel scale needs at least 2 rows, got {}", n));
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (n > max_rows) {
        auto rng = seeded_rng(seed, "kernel-scale");
        rng.shuffle(std::span(rows));
        rows.resize(max_rows);
        std::sort(rows.begin(), rows.end());
    }

    std::vector<double> dist;
    dist.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        auto u = train_rows.row(rows[a]);
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            auto v = train_rows.row(rows[b]);
            double sq = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) {
                double diff = u[k] - v[k];
                sq += diff * diff;
            }
            dist.push_back(std::sqrt(sq));
        }
    }
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
    double median = dist[mid];
    if (dist.size() % 2 == 0) {
        double lower = *std::max_element(dist.begin(), dist.begin() + mid);
        median = 0.5 * (lower + median);
    }
    return median > 0.0 ? median : 1.0;
}

}  // namespace bucket
