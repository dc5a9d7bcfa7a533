#include "mlbp/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mlbp {

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("GrayImage: dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("GrayImage: pixel count does not match width*height");
    }
    for (double v : pixels_) {
        if (!(v >= 0.0 && v <= kMaxIntensity)) {
            throw std::invalid_argument("GrayImage: intensity out of [0,255]: " + std::to_string(v));
        }
    }
}

GrayImage::GrayImage(int width, int height, double value)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                        static_cast<std::size_t>(height > 0 ? height : 0),
                                    value)) {}

GrayImage rotate90(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    // Output is h wide, w tall.
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int ox = y;
            const int oy = w - 1 - x;
            out[static_cast<std::size_t>(oy) * h + ox] = img.at(x, y);
        }
    }
    return GrayImage(h, w, std::move(out));
}

}  // namespace mlbp
