#pragma once

// Single-threaded reference kernels. The parallel versions in imageprep.hpp
// and descriptor.hpp must agree with these bit for bit; tests and the
// benchmark target compare the two.

#include "mlbp/descriptor.hpp"
#include "mlbp/image.hpp"

namespace mlbp::serial {

GrayImage gaussian_smooth(const GrayImage& img, double sigma, int kernel_radius);

LabelImage label_image(const GrayImage& img, const NeighborhoodSpec& spec);

FeatureVector histogram_features(const LabelImage& labels, const NeighborhoodSpec& spec);

}  // namespace mlbp::serial
