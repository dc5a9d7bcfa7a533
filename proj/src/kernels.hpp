#pragma once

// Row kernels shared by the OpenMP and serial paths. Both call exactly these
// functions per row, which is what makes their outputs bit-identical.

#include <algorithm>
#include <span>
#include <vector>

#include "mlbp/image.hpp"

namespace mlbp::kernels {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

/// Horizontal pass for row y of `img` into `out` (width entries).
inline void smooth_row_horizontal(const GrayImage& img, std::span<const double> kernel, int y,
                                  std::span<double> out) {
    const int w = img.width();
    const int r = static_cast<int>(kernel.size() / 2);
    const auto src = img.row(y);
    for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) acc += kernel[i + r] * src[clamp_index(x + i, w)];
        out[x] = acc;
    }
}

/// Vertical pass producing row y from the row-major buffer `tmp` (w x h).
inline void smooth_row_vertical(std::span<const double> tmp, int w, int h,
                                std::span<const double> kernel, int y, std::span<double> out) {
    const int r = static_cast<int>(kernel.size() / 2);
    for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
            acc += kernel[i + r] * tmp[static_cast<std::size_t>(clamp_index(y + i, h)) * w + x];
        }
        out[x] = std::clamp(acc, 0.0, GrayImage::kMaxIntensity);
    }
}

}  // namespace mlbp::kernels
