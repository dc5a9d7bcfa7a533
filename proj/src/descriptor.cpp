#include "mlbp/descriptor.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mlbp/serial.hpp"

namespace mlbp {
namespace {

double snap_near_integer(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-12 ? r : v;
}

SampleTap make_tap(double dx, double dy) {
    SampleTap t{dx, dy, 0, 0, 0.0, 0.0};
    auto split = [](double d, int& i, double& a) {
        i = static_cast<int>(std::floor(d));
        a = d - i;
        if (a < kSnapTolerance) {
            a = 0.0;
        } else if (1.0 - a < kSnapTolerance) {
            ++i;
            a = 0.0;
        }
    };
    split(dx, t.ix, t.ax);
    split(dy, t.iy, t.ay);
    return t;
}

std::uint64_t low_mask(int p) { return p >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1; }

// Interpolated intensity at (xc, yc) + tap. Lerp form keeps equal corners exact.
inline double sample_tap(const GrayImage& img, int xc, int yc, const SampleTap& t) noexcept {
    const int x0 = xc + t.ix;
    const int y0 = yc + t.iy;
    const double p00 = img.at(x0, y0);
    if (t.ax == 0.0 && t.ay == 0.0) return p00;
    if (t.ay == 0.0) return p00 + t.ax * (img.at(x0 + 1, y0) - p00);
    const double p10 = img.at(x0, y0 + 1);
    if (t.ax == 0.0) return p00 + t.ay * (p10 - p00);
    const double top = p00 + t.ax * (img.at(x0 + 1, y0) - p00);
    const double bottom = p10 + t.ax * (img.at(x0 + 1, y0 + 1) - p10);
    return top + t.ay * (bottom - top);
}

inline bool at_least(double neighbor, double center) noexcept {
    return neighbor - center >= -kTieTolerance;
}

inline int uniformity_of(std::uint64_t code, int p) noexcept {
    const std::uint64_t rotated = ((code >> 1) | ((code & 1u) << (p - 1))) & low_mask(p);
    return std::popcount(code ^ rotated);
}

inline int label_of(std::uint64_t code, int p, int threshold) noexcept {
    return uniformity_of(code, p) <= threshold ? std::popcount(code) : p + 1;
}

void require_interior(const GrayImage& img, const NeighborhoodSpec& spec) {
    const int m = spec.margin();
    if (img.width() <= 2 * m || img.height() <= 2 * m) {
        throw std::invalid_argument("image " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " too small for radius " +
                                    std::to_string(spec.radius()));
    }
}

}  // namespace

NeighborhoodSpec::NeighborhoodSpec(int neighbors, double radius, std::optional<int> threshold)
    : neighbors_(neighbors),
      radius_(radius),
      threshold_(threshold.value_or(neighbors / 4)),
      margin_(0) {
    if (neighbors < kMinNeighbors || neighbors > kMaxNeighbors) {
        throw std::invalid_argument("neighbor count must be in [" + std::to_string(kMinNeighbors) +
                                    ", " + std::to_string(kMaxNeighbors) + "]");
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be > 0");
    if (threshold_ < 0 || threshold_ > neighbors) {
        throw std::invalid_argument("uniformity threshold must be in [0, P]");
    }
    margin_ = static_cast<int>(std::ceil(radius));

    std::vector<std::pair<double, double>> offsets(neighbors);
    // With P divisible by 4 the later quadrants are exact quarter turns of the
    // first: (dx, dy) -> (dy, -dx). Keeps rot90 symmetry free of rounding.
    const int computed = neighbors % 4 == 0 ? neighbors / 4 : neighbors;
    for (int k = 0; k < computed; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / neighbors;
        offsets[k] = {snap_near_integer(radius * std::cos(theta)),
                      snap_near_integer(-radius * std::sin(theta))};
    }
    for (int k = computed; k < neighbors; ++k) {
        const auto [dx, dy] = offsets[k - computed];
        offsets[k] = {dy, -dx};
    }
    taps_.reserve(neighbors);
    for (const auto& [dx, dy] : offsets) taps_.push_back(make_tap(dx, dy));
}

BinaryPattern::BinaryPattern(std::uint64_t code, int length) : code_(code), length_(length) {
    if (length < 1 || length > 64) throw std::invalid_argument("pattern length must be in [1, 64]");
    if ((code & ~low_mask(length)) != 0) throw std::invalid_argument("code exceeds 2^P - 1");
}

BinaryPattern BinaryPattern::from_bits(std::span<const int> bits) {
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] != 0 && bits[k] != 1) throw std::invalid_argument("bits must be 0 or 1");
        code |= static_cast<std::uint64_t>(bits[k]) << k;
    }
    return BinaryPattern(code, static_cast<int>(bits.size()));
}

std::vector<int> BinaryPattern::bits() const {
    std::vector<int> out(length_);
    for (int k = 0; k < length_; ++k) out[k] = bit(k);
    return out;
}

int BinaryPattern::ones() const noexcept { return std::popcount(code_); }

LabelImage::LabelImage(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width < 0 || height < 0 ||
        labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("LabelImage: label count does not match dimensions");
    }
}

double bilinear_at(const GrayImage& img, double fx, double fy) {
    const double max_x = img.width() - 1;
    const double max_y = img.height() - 1;
    if (!(fx >= 0.0 && fx <= max_x && fy >= 0.0 && fy <= max_y)) {
        throw std::out_of_range("bilinear sample (" + std::to_string(fx) + ", " + std::to_string(fy) +
                                ") outside image");
    }
    const double rx = std::round(fx);
    const double ry = std::round(fy);
    const bool snap_x = std::abs(fx - rx) < kSnapTolerance;
    const bool snap_y = std::abs(fy - ry) < kSnapTolerance;
    if (snap_x && snap_y) return img.at(static_cast<int>(rx), static_cast<int>(ry));

    const int x0 = snap_x ? static_cast<int>(rx) : static_cast<int>(std::floor(fx));
    const int y0 = snap_y ? static_cast<int>(ry) : static_cast<int>(std::floor(fy));
    const double a = snap_x ? 0.0 : fx - x0;
    const double b = snap_y ? 0.0 : fy - y0;
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double top = img.at(x0, y0) + a * (img.at(x1, y0) - img.at(x0, y0));
    const double bottom = img.at(x0, y1) + a * (img.at(x1, y1) - img.at(x0, y1));
    return top + b * (bottom - top);
}

std::vector<double> sample_neighbors(const GrayImage& img, int xc, int yc,
                                     const NeighborhoodSpec& spec) {
    const int m = spec.margin();
    if (xc < m || xc >= img.width() - m || yc < m || yc >= img.height() - m) {
        throw std::out_of_range("pixel (" + std::to_string(xc) + ", " + std::to_string(yc) +
                                ") is not interior for radius " + std::to_string(spec.radius()));
    }
    std::vector<double> out;
    out.reserve(spec.neighbors());
    for (const auto& t : spec.taps()) out.push_back(sample_tap(img, xc, yc, t));
    return out;
}

BinaryPattern lbp_code(double center, std::span<const double> neighbors) {
    if (neighbors.empty() || neighbors.size() > 64) {
        throw std::invalid_argument("neighbor sequence length must be in [1, 64]");
    }
    std::uint64_t code = 0;
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
        if (at_least(neighbors[k], center)) code |= std::uint64_t{1} << k;
    }
    return BinaryPattern(code, static_cast<int>(neighbors.size()));
}

int uniformity(const BinaryPattern& pattern) noexcept {
    return uniformity_of(pattern.code(), pattern.length());
}

int mlbp_label(const BinaryPattern& pattern, const NeighborhoodSpec& spec) {
    if (pattern.length() != spec.neighbors()) {
        throw std::invalid_argument("pattern length does not match P");
    }
    return label_of(pattern.code(), spec.neighbors(), spec.threshold());
}

int mlbp_label(double center, std::span<const double> neighbors, const NeighborhoodSpec& spec) {
    if (static_cast<int>(neighbors.size()) != spec.neighbors()) {
        throw std::invalid_argument("expected " + std::to_string(spec.neighbors()) + " neighbors, got " +
                                    std::to_string(neighbors.size()));
    }
    return mlbp_label(lbp_code(center, neighbors), spec);
}

namespace detail {

int label_at(const GrayImage& img, int xc, int yc, const NeighborhoodSpec& spec) noexcept {
    const double center = img.at(xc, yc);
    std::uint64_t code = 0;
    const auto taps = spec.taps();
    for (std::size_t k = 0; k < taps.size(); ++k) {
        if (at_least(sample_tap(img, xc, yc, taps[k]), center)) code |= std::uint64_t{1} << k;
    }
    return label_of(code, spec.neighbors(), spec.threshold());
}

}  // namespace detail

LabelImage label_image(const GrayImage& img, const NeighborhoodSpec& spec) {
    require_interior(img, spec);
    const int m = spec.margin();
    const int w = img.width() - 2 * m;
    const int h = img.height() - 2 * m;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            labels[static_cast<std::size_t>(y) * w + x] =
                static_cast<std::uint8_t>(detail::label_at(img, x + m, y + m, spec));
        }
    }
    return LabelImage(w, h, std::move(labels));
}

namespace {

FeatureVector normalize_counts(const std::vector<std::size_t>& counts, std::size_t total,
                               const NeighborhoodSpec& spec) {
    FeatureVector f;
    f.values.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        f.values[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    f.scales.push_back(spec);
    return f;
}

void require_labels(const LabelImage& labels) {
    if (labels.size() == 0) throw std::invalid_argument("empty label image");
}

}  // namespace

FeatureVector histogram_features(const LabelImage& labels, const NeighborhoodSpec& spec) {
    require_labels(labels);
    const int bins = spec.bins();
    const auto data = labels.labels();
    const auto n = static_cast<std::ptrdiff_t>(data.size());
    std::vector<std::size_t> counts(bins, 0);
    bool bad = false;

#pragma omp parallel
    {
        std::vector<std::size_t> local(bins, 0);
        bool local_bad = false;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            if (data[i] < bins) {
                ++local[data[i]];
            } else {
                local_bad = true;
            }
        }
#pragma omp critical
        {
            for (int b = 0; b < bins; ++b) counts[b] += local[b];
            bad = bad || local_bad;
        }
    }
    if (bad) throw std::invalid_argument("label exceeds P + 1");
    return normalize_counts(counts, data.size(), spec);
}

FeatureVector extract(const GrayImage& img, const NeighborhoodSpec& spec, const PreprocessConfig& cfg) {
    return histogram_features(label_image(preprocess(img, cfg), spec), spec);
}

FeatureVector extract_multiscale(const GrayImage& img, std::span<const NeighborhoodSpec> scales,
                                 const PreprocessConfig& cfg) {
    if (scales.empty()) throw std::invalid_argument("at least one scale is required");
    const GrayImage prepared = preprocess(img, cfg);
    const double weight = 1.0 / static_cast<double>(scales.size());
    FeatureVector out;
    for (const auto& spec : scales) {
        const auto block = histogram_features(label_image(prepared, spec), spec);
        for (double v : block.values) out.values.push_back(v * weight);
        out.scales.push_back(spec);
    }
    return out;
}

namespace serial {

LabelImage label_image(const GrayImage& img, const NeighborhoodSpec& spec) {
    require_interior(img, spec);
    const int m = spec.margin();
    const int w = img.width() - 2 * m;
    const int h = img.height() - 2 * m;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            labels[static_cast<std::size_t>(y) * w + x] =
                static_cast<std::uint8_t>(detail::label_at(img, x + m, y + m, spec));
        }
    }
    return LabelImage(w, h, std::move(labels));
}

FeatureVector histogram_features(const LabelImage& labels, const NeighborhoodSpec& spec) {
    require_labels(labels);
    std::vector<std::size_t> counts(spec.bins(), 0);
    for (auto l : labels.labels()) {
        if (l >= counts.size()) throw std::invalid_argument("label exceeds P + 1");
        ++counts[l];
    }
    return normalize_counts(counts, labels.size(), spec);
}

}  // namespace serial

}  // namespace mlbp
