#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mlbp/error.hpp"
#include "mlbp/imageprep.hpp"

namespace mlbp {
namespace {

using Kind = ImageError::Kind;

// BT.601 luma in integer thousandths so equal channels map back exactly.
double luminance(unsigned r, unsigned g, unsigned b) {
    return static_cast<double>(299u * r + 587u * g + 114u * b) / 1000.0;
}

class PnmReader {
public:
    PnmReader(const std::vector<unsigned char>& bytes, std::string path)
        : bytes_(bytes), path_(std::move(path)) {}

    GrayImage read() {
        pos_ = 2;
        const bool ascii = bytes_[1] == '2';
        const long width = header_int("width");
        const long height = header_int("height");
        const long maxval = header_int("maxval");
        if (width == 0 || height == 0) {
            throw ImageError(Kind::ZeroDimension, path_, "image has zero width or height");
        }
        if (width < 0 || height < 0 || width > 1 << 16 || height > 1 << 16) {
            throw ImageError(Kind::Malformed, path_, "implausible PGM dimensions");
        }
        if (maxval < 1 || maxval > 65535) {
            throw ImageError(Kind::Malformed, path_, "PGM maxval out of range");
        }
        const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        std::vector<double> pixels(count);
        const double scale = GrayImage::kMaxIntensity / static_cast<double>(maxval);

        if (ascii) {
            for (auto& p : pixels) {
                const long v = header_int("pixel");
                if (v > maxval) throw ImageError(Kind::Malformed, path_, "PGM sample exceeds maxval");
                p = static_cast<double>(v) * scale;
            }
        } else {
            // Exactly one whitespace byte separates maxval from the raster.
            ++pos_;
            const std::size_t bpp = maxval < 256 ? 1 : 2;
            if (bytes_.size() < pos_ + count * bpp) {
                throw ImageError(Kind::Malformed, path_, "truncated PGM raster");
            }
            for (std::size_t i = 0; i < count; ++i) {
                unsigned v = bytes_[pos_ + i * bpp];
                if (bpp == 2) v = (v << 8) | bytes_[pos_ + i * bpp + 1];
                if (v > static_cast<unsigned>(maxval)) {
                    throw ImageError(Kind::Malformed, path_, "PGM sample exceeds maxval");
                }
                pixels[i] = static_cast<double>(v) * scale;
            }
        }
        for (auto& p : pixels) p = std::min(p, GrayImage::kMaxIntensity);
        return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long header_int(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw ImageError(Kind::Malformed, path_, std::string("expected PGM ") + what);
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000) throw ImageError(Kind::Malformed, path_, std::string("PGM ") + what + " too large");
            ++pos_;
        }
        return v;
    }

    const std::vector<unsigned char>& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

GrayImage read_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw ImageError(Kind::Malformed, path, "PNG decode failed: " + msg);
    }
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw ImageError(Kind::ZeroDimension, path, "image has zero width or height");
    }
    if (image.format & (PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR)) {
        png_image_free(&image);
        throw ImageError(Kind::UnsupportedFormat, path,
                         "only 8-bit grayscale or RGB PNG without alpha is supported");
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw ImageError(Kind::Malformed, path, "PNG decode failed: " + msg);
    }
    const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
    std::vector<double> pixels(count);
    if (color) {
        for (std::size_t i = 0; i < count; ++i) {
            pixels[i] = luminance(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
        }
    } else {
        std::transform(buffer.begin(), buffer.end(), pixels.begin(),
                       [](png_byte b) { return static_cast<double>(b); });
    }
    return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(Kind::Unreadable, name, "cannot open file");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw ImageError(Kind::Unreadable, name, "read error");

    static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
        return read_png(bytes, name);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        return PnmReader(bytes, name).read();
    }
    throw ImageError(Kind::UnsupportedFormat, name, "not a PGM (P2/P5) or PNG file");
}

}  // namespace mlbp
