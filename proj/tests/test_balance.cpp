#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "bucket/balance.hpp"
#include "bucket/rng.hpp"

using namespace bucket;

namespace {

PixelImage random_image(RandomStream& rng, std::size_t w, std::size_t h) {
    std::vector<Rgb> px(w * h);
    for (auto& p : px) {
        for (auto& c : p) c = static_cast<std::uint8_t>(rng.uniform_index(256));
    }
    return PixelImage(w, h, px);
}

std::vector<Label> counts(std::size_t pos, std::size_t neg) {
    std::vector<Label> v(pos, Label::positive);
    v.insert(v.end(), neg, Label::negative);
    return v;
}

}  // namespace

TEST_CASE("uniform image is a fixed point") {
    PixelImage img(6, 5, std::vector<Rgb>(30, Rgb{12, 200, 99}));
    for (int k : {1, 2, 3, 4}) {
        auto r = kmeans_colors(img, k, 7);
        CHECK(r.quantized == img);
    }
}

TEST_CASE("k=1 centroid is the rounded mean color") {
    auto rng = seeded_rng(1, "kmeans-mean");
    auto img = random_image(rng, 9, 7);
    auto r = kmeans_colors(img, 1, 3);
    std::array<double, 3> sum{0, 0, 0};
    for (const auto& p : img.pixels) {
        for (int c = 0; c < 3; ++c) sum[c] += p[c];
    }
    for (int c = 0; c < 3; ++c) {
        double mean = sum[c] / static_cast<double>(img.pixels.size());
        CHECK(r.centroids[0][c] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(r.quantized.pixels[0][c] == static_cast<std::uint8_t>(std::lround(mean)));
    }
}

TEST_CASE("two colors with k=2 reconstruct exactly") {
    std::vector<Rgb> px;
    for (int i = 0; i < 40; ++i) px.push_back(i % 3 ? Rgb{250, 10, 10} : Rgb{5, 5, 120});
    PixelImage img(8, 5, px);
    auto r = kmeans_colors(img, 2, 11);
    CHECK(r.quantized == img);
    CHECK(r.sse_history.back() == 0.0);
}

TEST_CASE("sse history is non-increasing and output deterministic") {
    auto rng = seeded_rng(2, "kmeans-sse");
    for (int trial = 0; trial < 10; ++trial) {
        auto img = random_image(rng, 12, 10);
        int k = 1 + static_cast<int>(rng.uniform_index(5));
        auto r = kmeans_colors(img, k, 99);
        for (std::size_t i = 1; i < r.sse_history.size(); ++i) CHECK(r.sse_history[i] <= r.sse_history[i - 1]);
        auto again = kmeans_colors(img, k, 99);
        CHECK(again.quantized == r.quantized);
    }
}

TEST_CASE("kmeans errors") {
    PixelImage img(1, 1, {Rgb{0, 0, 0}});
    CHECK_THROWS_AS(kmeans_colors(img, 0, 1), ConfigError);
    CHECK_THROWS_AS(PixelImage(2, 2, std::vector<Rgb>(3)), DataError);
}

TEST_CASE("ppm round trip") {
    auto rng = seeded_rng(3, "ppm");
    auto img = random_image(rng, 5, 4);
    auto bytes = encode_ppm(img);
    CHECK(parse_ppm(bytes) == img);

    auto path = std::filesystem::temp_directory_path() / "bucket_ppm_roundtrip.ppm";
    write_ppm(path, img);
    CHECK(read_ppm(path) == img);
    std::filesystem::remove(path);

    bytes.pop_back();
    CHECK_THROWS_AS(parse_ppm(bytes), DataError);
}

TEST_CASE("balance deficits") {
    auto a = plan_balance(counts(70, 100), 1);
    CHECK(a.deficit == 30u);
    CHECK(a.minority == Label::positive);
    CHECK(a.assignments.size() == 30u);

    auto b = plan_balance(counts(119, 87), 1);
    CHECK(b.deficit == 32u);
    CHECK(b.minority == Label::negative);

    auto c = plan_balance(counts(50, 50), 1);
    CHECK(c.deficit == 0u);
    CHECK(c.assignments.empty());

    CHECK_THROWS_AS(plan_balance(counts(5, 0), 1), DataError);
}

TEST_CASE("balance assignments") {
    auto labels = counts(7, 20);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < labels.size(); ++i) ids.push_back("im" + std::to_string(i));
    auto plan = plan_balance(ids, labels, 5);
    REQUIRE(plan.assignments.size() == 13u);

    std::set<std::string> outputs;
    std::map<std::size_t, int> uses;
    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
        const auto& a = plan.assignments[i];
        CHECK(labels[a.source] == Label::positive);
        CHECK(a.k == kBalanceKs[i % kBalanceKs.size()]);
        CHECK(a.output_id.rfind(ids[a.source] + "_km", 0) == 0);
        outputs.insert(a.output_id);
        ++uses[a.source];
    }
    CHECK(outputs.size() == plan.assignments.size());
    // Round-robin: every minority image is used once or twice.
    CHECK(uses.size() == 7u);
    for (auto [src, n] : uses) CHECK((n == 1 || n == 2));

    auto again = plan_balance(ids, labels, 5);
    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
        CHECK(again.assignments[i].output_id == plan.assignments[i].output_id);
    }
}
