#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bucket/core.hpp"

namespace bucket {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB image.
struct PixelImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Rgb> pixels;

    PixelImage() = default;
    /// Throws DataError when the pixel count does not match width*height or a dimension is zero.
    PixelImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels);

    friend bool operator==(const PixelImage&, const PixelImage&) = default;
};

/// Binary PPM (P6, maxval 255). Throws DataError on malformed files.
PixelImage read_ppm(const std::filesystem::path& path);
PixelImage parse_ppm(std::span<const std::uint8_t> bytes);
void write_ppm(const std::filesystem::path& path, const PixelImage& image);
std::vector<std::uint8_t> encode_ppm(const PixelImage& image);

struct KMeansResult {
    /// Real-valued centroids; rounded only when written into `quantized`.
    std::vector<std::array<double, 3>> centroids;
    PixelImage quantized;
    /// Within-cluster SSE after each assignment step.
    std::vector<double> sse_history;
    int iterations = 0;
    bool converged = false;
};

/// Lloyd's algorithm on RGB triples with k-means++ seeding. Empty clusters
/// are re-seeded at the pixel farthest from its centroid. Centroid channels
/// are rounded half away from zero at output. Throws ConfigError for k < 1.
KMeansResult kmeans_colors(const PixelImage& image, int k, std::uint64_t seed, int max_iter = 50);

struct AugmentationAssignment {
    std::size_t source;  ///< index into the label list
    int k;
    std::string output_id;
};

struct BalancePlan {
    Label minority = Label::positive;
    std::size_t deficit = 0;
    std::vector<AugmentationAssignment> assignments;
};

/// k values cycled over augmented copies.
inline constexpr std::array<int, 3> kBalanceKs{2, 3, 4};

/// Plans `deficit` augmented copies of minority images: sources round-robin
/// over the minority images in seeded-shuffled order, k cycling over {2,3,4}.
/// Output ids are "<source id>_km<k>_<copy>". Throws DataError for single-class input.
BalancePlan plan_balance(std::span<const std::string> ids, std::span<const Label> labels, std::uint64_t seed);

/// Overload naming rows by index.
BalancePlan plan_balance(std::span<const Label> labels, std::uint64_t seed);

}  // namespace bucket
