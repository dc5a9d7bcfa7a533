#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlbp/image.hpp"
#include "mlbp/imageprep.hpp"

namespace mlbp {

/// Sampling coordinates within this distance of an integer snap to the grid.
inline constexpr double kSnapTolerance = 1e-6;
/// A neighbour counts as ">= centre" when g_k - g_c >= -kTieTolerance. Absorbs
/// rounding noise so that exact ties survive smoothing and interpolation.
inline constexpr double kTieTolerance = 1e-9;

inline constexpr int kMinNeighbors = 4;
inline constexpr int kMaxNeighbors = 32;

/// Precomputed bilinear tap for one neighbour: integer offset of the
/// top-left grid pixel plus fractional weights along x and y.
struct SampleTap {
    double dx = 0.0;
    double dy = 0.0;
    int ix = 0;
    int iy = 0;
    double ax = 0.0;
    double ay = 0.0;
};

/// Circular sampling geometry (P neighbours at radius R) plus the
/// uniformity threshold U_T. Neighbour k (0-based) sits at angle 2*pi*k/P
/// counter-clockwise from +x with the image y axis pointing down.
class NeighborhoodSpec {
public:
    /// `threshold` defaults to floor(P / 4).
    NeighborhoodSpec(int neighbors = defaults::kNeighbors, double radius = defaults::kRadius,
                     std::optional<int> threshold = std::nullopt);

    int neighbors() const noexcept { return neighbors_; }
    double radius() const noexcept { return radius_; }
    int threshold() const noexcept { return threshold_; }
    /// Border excluded from labelling: ceil(R).
    int margin() const noexcept { return margin_; }
    /// Feature dimension P + 2.
    int bins() const noexcept { return neighbors_ + 2; }
    int non_uniform_label() const noexcept { return neighbors_ + 1; }

    std::span<const SampleTap> taps() const noexcept { return taps_; }

    bool operator==(const NeighborhoodSpec& o) const noexcept {
        return neighbors_ == o.neighbors_ && radius_ == o.radius_ && threshold_ == o.threshold_;
    }

private:
    int neighbors_;
    double radius_;
    int threshold_;
    int margin_;
    std::vector<SampleTap> taps_;
};

/// P comparison bits, b_1 stored as the least significant bit of `code`.
class BinaryPattern {
public:
    BinaryPattern(std::uint64_t code, int length);
    static BinaryPattern from_bits(std::span<const int> bits);

    std::uint64_t code() const noexcept { return code_; }
    int length() const noexcept { return length_; }
    /// 0-based bit access; bit(0) is b_1.
    int bit(int k) const noexcept { return static_cast<int>((code_ >> k) & 1u); }
    std::vector<int> bits() const;
    int ones() const noexcept;

    bool operator==(const BinaryPattern&) const = default;

private:
    std::uint64_t code_;
    int length_;
};

/// Per-interior-pixel MLBP labels, raster order.
class LabelImage {
public:
    LabelImage(int width, int height, std::vector<std::uint8_t> labels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int at(int x, int y) const noexcept {
        return labels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    bool operator==(const LabelImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> labels_;
};

/// Label-occurrence probabilities. For a multi-scale vector `scales` holds
/// one spec per concatenated block.
struct FeatureVector {
    std::vector<double> values;
    std::vector<NeighborhoodSpec> scales;

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Bilinear sample; exact pixel when both coordinates are within
/// kSnapTolerance of integers. Throws std::out_of_range outside the image.
double bilinear_at(const GrayImage& img, double fx, double fy);

/// The P interpolated neighbour intensities around an interior pixel.
std::vector<double> sample_neighbors(const GrayImage& img, int xc, int yc,
                                     const NeighborhoodSpec& spec);

BinaryPattern lbp_code(double center, std::span<const double> neighbors);

/// Circular count of 0/1 transitions.
int uniformity(const BinaryPattern& pattern) noexcept;

/// Ones-count when U <= U_T, P + 1 otherwise.
int mlbp_label(const BinaryPattern& pattern, const NeighborhoodSpec& spec);
int mlbp_label(double center, std::span<const double> neighbors, const NeighborhoodSpec& spec);

/// Labels every interior pixel. Parallel over rows.
LabelImage label_image(const GrayImage& img, const NeighborhoodSpec& spec);

FeatureVector histogram_features(const LabelImage& labels, const NeighborhoodSpec& spec);

/// preprocess -> label_image -> histogram_features.
FeatureVector extract(const GrayImage& img, const NeighborhoodSpec& spec,
                      const PreprocessConfig& cfg);

/// Concatenates one histogram per scale. Each block is scaled by
/// 1 / scales.size() so the whole vector still sums to 1.
FeatureVector extract_multiscale(const GrayImage& img, std::span<const NeighborhoodSpec> scales,
                                 const PreprocessConfig& cfg);

namespace detail {
/// Label at one interior pixel using the spec's precomputed taps. Shared by
/// the serial and parallel kernels.
int label_at(const GrayImage& img, int xc, int yc, const NeighborhoodSpec& spec) noexcept;
}  // namespace detail

}  // namespace mlbp
