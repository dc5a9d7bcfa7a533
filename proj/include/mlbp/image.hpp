#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mlbp {

/// Row-major grid of real intensities in [0, 255]. Immutable after
/// construction; every constructor validates dimensions and range.
class GrayImage {
public:
    static constexpr double kMaxIntensity = 255.0;

    GrayImage(int width, int height, std::vector<double> pixels);
    /// Constant image.
    GrayImage(int width, int height, double value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double at(int x, int y) const noexcept {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const double> row(int y) const noexcept {
        return {pixels_.data() + static_cast<std::size_t>(y) * width_,
                static_cast<std::size_t>(width_)};
    }
    std::span<const double> pixels() const noexcept { return pixels_; }

    bool operator==(const GrayImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> pixels_;
};

/// Rotates a quarter turn counter-clockwise: out(y, W-1-x) = in(x, y).
GrayImage rotate90(const GrayImage& img);

}  // namespace mlbp
