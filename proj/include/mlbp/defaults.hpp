#pragma once

// Single source of truth for pipeline defaults. The CLI help text, the
// library config structs and the README all read from here.

namespace mlbp::defaults {

inline constexpr int kNeighbors = 8;
inline constexpr double kRadius = 1.0;
inline constexpr int kUniformityThreshold = 2;  // floor(P / 4) for P = 8

inline constexpr int kTargetSize = 128;
inline constexpr double kSigma = 1.0;
inline constexpr int kKernelRadius = 2;
inline constexpr bool kSmoothing = true;

inline constexpr int kKnnT = 3;
inline constexpr const char* kMetric = "tanimoto";
inline constexpr int kFolds = 10;
inline constexpr unsigned long long kSeed = 42;

// Published per-image runtime, used as a reference line by the benchmark.
inline constexpr double kReferenceMsPerImage = 519.0;
inline constexpr double kReferenceBatchSeconds = 46.73;
inline constexpr int kReferenceBatchImages = 90;

}  // namespace mlbp::defaults
