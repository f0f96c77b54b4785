#include "bucket/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bucket {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        // Positions i..j-1 share ranks i+1..j.
        double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

double pearson(std::span<const double> u, std::span<const double> v) {
    const std::size_t n = u.size();
    if (n == 0) return 0.0;
    double mu = 0.0;
    double mv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mu += u[k];
        mv += v[k];
    }
    mu /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double cov = 0.0;
    double vu = 0.0;
    double vv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double a = u[k] - mu;
        double b = v[k] - mv;
        cov += a * b;
        vu += a * a;
        vv += b * b;
    }
    if (vu == 0.0 || vv == 0.0) return 0.0;
    double rho = cov / std::sqrt(vu * vv);
    return std::clamp(rho, -1.0, 1.0);
}

double rank_distance(std::span<const double> u, std::span<const double> v, RankDistance kind) {
    if (kind == RankDistance::spearman) {
        auto ru = average_ranks(u);
        auto rv = average_ranks(v);
        return 1.0 - pearson(ru, rv);
    }
    return 1.0 - pearson(u, v);
}

}  // namespace bucket
