#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include <fmt/format.h>

#include "bucket/balance.hpp"

namespace bucket {
namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string token() {
        skip_space_and_comments();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) t.push_back(static_cast<char>(bytes_[pos_++]));
        if (t.empty()) throw DataError(DataErrorKind::parse, "ppm: truncated header");
        return t;
    }

    std::size_t number() {
        std::string t = token();
        std::size_t v = 0;
        for (char c : t) {
            if (c < '0' || c > '9') throw DataError(DataErrorKind::parse, fmt::format("ppm: bad header field '{}'", t));
            v = v * 10 + static_cast<std::size_t>(c - '0');
            if (v > (1u << 24)) throw DataError(DataErrorKind::parse, "ppm: header value too large");
        }
        return v;
    }

    /// Consumes the single whitespace byte that ends the header.
    std::size_t data_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw DataError(DataErrorKind::parse, "ppm: missing whitespace after header");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

PixelImage parse_ppm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes);
    if (reader.token() != "P6") throw DataError(DataErrorKind::parse, "ppm: only binary P6 is supported");
    const std::size_t width = reader.number();
    const std::size_t height = reader.number();
    const std::size_t maxval = reader.number();
    if (maxval != 255) throw DataError(DataErrorKind::parse, fmt::format("ppm: maxval {} unsupported", maxval));
    const std::size_t offset = reader.data_offset();
    const std::size_t needed = width * height * 3;
    if (bytes.size() < offset + needed) throw DataError(DataErrorKind::parse, "ppm: truncated pixel data");

    std::vector<Rgb> pixels(width * height);
    for (std::size_t p = 0; p < pixels.size(); ++p) {
        const std::uint8_t* src = bytes.data() + offset + 3 * p;
        pixels[p] = {src[0], src[1], src[2]};
    }
    return PixelImage(width, height, std::move(pixels));
}

PixelImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open image '{}'", path.string()));
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_ppm(bytes);
    } catch (const DataError& e) {
        throw DataError(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<std::uint8_t> encode_ppm(const PixelImage& image) {
    std::string header = fmt::format("P6\n{} {}\n255\n", image.width, image.height);
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.pixels.size() * 3);
    for (const auto& px : image.pixels) out.insert(out.end(), px.begin(), px.end());
    return out;
}

void write_ppm(const std::filesystem::path& path, const PixelImage& image) {
    auto bytes = encode_ppm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write image '{}'", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace bucket
