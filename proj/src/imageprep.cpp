#include "mlbp/imageprep.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernels.hpp"
#include "mlbp/serial.hpp"

namespace mlbp {

void PreprocessConfig::validate() const {
    if (target_size < 1) throw std::invalid_argument("target size must be >= 1");
    if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
    if (kernel_radius < 1) throw std::invalid_argument("kernel radius must be >= 1");
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
    if (radius < 1) throw std::invalid_argument("kernel radius must be >= 1");
    std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma, int kernel_radius) {
    const auto kernel = gaussian_kernel(sigma, kernel_radius);
    const int w = img.width();
    const int h = img.height();
    std::vector<double> tmp(img.size());
    std::vector<double> out(img.size());

#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            kernels::smooth_row_horizontal(img, kernel, y,
                                           std::span(tmp).subspan(static_cast<std::size_t>(y) * w, w));
        }
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            kernels::smooth_row_vertical(tmp, w, h, kernel, y,
                                         std::span(out).subspan(static_cast<std::size_t>(y) * w, w));
        }
    }
    return GrayImage(w, h, std::move(out));
}

namespace serial {

GrayImage gaussian_smooth(const GrayImage& img, double sigma, int kernel_radius) {
    const auto kernel = mlbp::gaussian_kernel(sigma, kernel_radius);
    const int w = img.width();
    const int h = img.height();
    std::vector<double> tmp(img.size());
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        kernels::smooth_row_horizontal(img, kernel, y,
                                       std::span(tmp).subspan(static_cast<std::size_t>(y) * w, w));
    }
    for (int y = 0; y < h; ++y) {
        kernels::smooth_row_vertical(tmp, w, h, kernel, y,
                                     std::span(out).subspan(static_cast<std::size_t>(y) * w, w));
    }
    return GrayImage(w, h, std::move(out));
}

}  // namespace serial

GrayImage resize_bilinear(const GrayImage& img, int size) {
    if (size < 1) throw std::invalid_argument("resize target must be >= 1");
    const int sw = img.width();
    const int sh = img.height();
    if (sw == size && sh == size) return img;

    // Source coordinate and weight per output column / row.
    struct Axis {
        int lo;
        int hi;
        double frac;
    };
    auto axis_map = [size](int src_size) {
        std::vector<Axis> map(size);
        const double scale = static_cast<double>(src_size) / size;
        for (int d = 0; d < size; ++d) {
            double s = (d + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
            const int lo = static_cast<int>(std::floor(s));
            map[d] = {lo, std::min(lo + 1, src_size - 1), s - lo};
        }
        return map;
    };
    const auto xs = axis_map(sw);
    const auto ys = axis_map(sh);

    std::vector<double> out(static_cast<std::size_t>(size) * size);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < size; ++y) {
        const auto top = img.row(ys[y].lo);
        const auto bottom = img.row(ys[y].hi);
        const double b = ys[y].frac;
        for (int x = 0; x < size; ++x) {
            const auto& c = xs[x];
            const double t = top[c.lo] + c.frac * (top[c.hi] - top[c.lo]);
            const double u = bottom[c.lo] + c.frac * (bottom[c.hi] - bottom[c.lo]);
            out[static_cast<std::size_t>(y) * size + x] =
                std::clamp(t + b * (u - t), 0.0, GrayImage::kMaxIntensity);
        }
    }
    return GrayImage(size, size, std::move(out));
}

GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg) {
    cfg.validate();
    if (!cfg.smoothing_enabled) return resize_bilinear(img, cfg.target_size);
    return resize_bilinear(gaussian_smooth(img, cfg.gaussian_sigma, cfg.kernel_radius),
                           cfg.target_size);
}

}  // namespace mlbp
