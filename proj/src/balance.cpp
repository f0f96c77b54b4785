#include "bucket/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "bucket/rng.hpp"

namespace bucket {
namespace {

using Color = std::array<double, 3>;

double squared_distance(const Rgb& p, const Color& c) {
    double s = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        double d = static_cast<double>(p[ch]) - c[ch];
        s += d * d;
    }
    return s;
}

Color to_color(const Rgb& p) {
    return {static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2])};
}

std::uint8_t round_channel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<Color> kmeanspp_seeds(const std::vector<Rgb>& pixels, int k, RandomStream& rng) {
    const std::size_t n = pixels.size();
    std::vector<Color> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(to_color(pixels[rng.uniform_index(n)]));
    std::vector<double> d2(n);
    for (std::size_t p = 0; p < n; ++p) d2[p] = squared_distance(pixels[p], centers.front());

    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                acc += d2[p];
                if (d2[p] > 0.0 && acc > target) {
                    pick = p;
                    break;
                }
            }
            // Guard against round-off leaving `target` past the last positive weight.
            while (d2[pick] == 0.0) --pick;
        } else {
            pick = rng.uniform_index(n);
        }
        centers.push_back(to_color(pixels[pick]));
        for (std::size_t p = 0; p < n; ++p) d2[p] = std::min(d2[p], squared_distance(pixels[p], centers.back()));
    }
    return centers;
}

/// Nearest centroid per pixel (lowest index on ties); returns the SSE.
double assign(const std::vector<Rgb>& pixels, const std::vector<Color>& centers, std::vector<std::size_t>& labels,
              std::vector<double>& dist) {
    double sse = 0.0;
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        std::size_t best = 0;
        double best_d = squared_distance(pixels[p], centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            double d = squared_distance(pixels[p], centers[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        labels[p] = best;
        dist[p] = best_d;
        sse += best_d;
    }
    return sse;
}

}  // namespace

PixelImage::PixelImage(std::size_t w, std::size_t h, std::vector<Rgb> px)
    : width(w), height(h), pixels(std::move(px)) {
    if (width == 0 || height == 0) throw DataError("image dimensions must be positive");
    if (pixels.size() != width * height) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("image has {} pixels, expected {}x{}", pixels.size(), width, height));
    }
}

KMeansResult kmeans_colors(const PixelImage& image, int k, std::uint64_t seed, int max_iter) {
    if (k < 1) throw ConfigError(fmt::format("k-means needs k >= 1, got {}", k));
    if (image.pixels.empty()) throw DataError("k-means on an empty image");
    const auto& pixels = image.pixels;
    const std::size_t n = pixels.size();
    const auto kk = static_cast<std::size_t>(k);

    auto rng = seeded_rng(seed, "kmeans-colors");
    KMeansResult out;
    std::vector<Color> centers = kmeanspp_seeds(pixels, k, rng);
    std::vector<std::size_t> labels(n);
    std::vector<double> dist(n);
    out.sse_history.push_back(assign(pixels, centers, labels, dist));

    std::vector<std::size_t> previous;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<Color> sums(kk, Color{0.0, 0.0, 0.0});
        std::vector<std::size_t> counts(kk, 0);
        for (std::size_t p = 0; p < n; ++p) {
            for (int ch = 0; ch < 3; ++ch) sums[labels[p]][ch] += pixels[p][ch];
            ++counts[labels[p]];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] == 0) continue;
            for (int ch = 0; ch < 3; ++ch) centers[c][ch] = sums[c][ch] / static_cast<double>(counts[c]);
        }
        for (std::size_t p = 0; p < n; ++p) dist[p] = squared_distance(pixels[p], centers[labels[p]]);
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            centers[c] = to_color(pixels[far]);
            for (std::size_t p = 0; p < n; ++p) dist[p] = std::min(dist[p], squared_distance(pixels[p], centers[c]));
        }

        previous = labels;
        out.sse_history.push_back(assign(pixels, centers, labels, dist));
        out.iterations = it;
        if (labels == previous) {
            out.converged = true;
            break;
        }
    }

    out.centroids = centers;
    std::vector<Rgb> rounded(kk);
    for (std::size_t c = 0; c < kk; ++c) {
        rounded[c] = {round_channel(centers[c][0]), round_channel(centers[c][1]), round_channel(centers[c][2])};
    }
    std::vector<Rgb> q(n);
    for (std::size_t p = 0; p < n; ++p) q[p] = rounded[labels[p]];
    out.quantized = PixelImage(image.width, image.height, std::move(q));
    return out;
}

BalancePlan plan_balance(std::span<const std::string> ids, std::span<const Label> labels, std::uint64_t seed) {
    if (ids.size() != labels.size()) throw ContractViolation("plan_balance: ids and labels differ in length");
    require_both_classes(labels, "balance");

    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::positive ? pos : neg).push_back(i);

    BalancePlan plan;
    plan.minority = pos.size() <= neg.size() ? Label::positive : Label::negative;
    auto& minority = plan.minority == Label::positive ? pos : neg;
    const auto& majority = plan.minority == Label::positive ? neg : pos;
    plan.deficit = majority.size() - minority.size();
    if (plan.deficit == 0) return plan;

    auto rng = seeded_rng(seed, "balance-plan");
    rng.shuffle(std::span(minority));
    plan.assignments.reserve(plan.deficit);
    for (std::size_t c = 0; c < plan.deficit; ++c) {
        std::size_t src = minority[c % minority.size()];
        int k = kBalanceKs[c % kBalanceKs.size()];
        plan.assignments.push_back({src, k, fmt::format("{}_km{}_{}", ids[src], k, c)});
    }
    return plan;
}

BalancePlan plan_balance(std::span<const Label> labels, std::uint64_t seed) {
    std::vector<std::string> ids(labels.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
    return plan_balance(ids, labels, seed);
}

}  // namespace bucket
