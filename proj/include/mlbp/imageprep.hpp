#pragma once

#include <filesystem>
#include <vector>

#include "mlbp/defaults.hpp"
#include "mlbp/image.hpp"

namespace mlbp {

struct PreprocessConfig {
    int target_size = defaults::kTargetSize;
    double gaussian_sigma = defaults::kSigma;
    int kernel_radius = defaults::kKernelRadius;
    bool smoothing_enabled = defaults::kSmoothing;

    /// Throws std::invalid_argument on a non-positive size, sigma or radius.
    void validate() const;

    bool operator==(const PreprocessConfig&) const = default;
};

/// Decodes PGM (P2/P5) or PNG. RGB is reduced with BT.601 luminance.
/// Throws ImageError with a kind per failure class.
GrayImage load_image(const std::filesystem::path& path);

/// Truncated Gaussian of half-width `radius`, renormalized to sum to 1.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable Gaussian blur with replicate padding. Rows are processed in
/// parallel; see serial::gaussian_smooth for the reference.
GrayImage gaussian_smooth(const GrayImage& img, double sigma, int kernel_radius);

/// Bilinear resize to size x size using half-pixel-centre alignment.
GrayImage resize_bilinear(const GrayImage& img, int size);

/// Smoothing (when enabled) followed by resizing.
GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg);

}  // namespace mlbp
