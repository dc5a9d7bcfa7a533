#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlbp/classify.hpp"
#include "mlbp/descriptor.hpp"
#include "mlbp/imageprep.hpp"

namespace mlbp {

/// 64-bit linear congruential generator (Knuth MMIX constants):
///   state <- 6364136223846793005 * state + 1442695040888963407 (mod 2^64)
/// next32() returns the high 32 bits of the new state. The initial state is
/// the seed itself. Fixed so fold plans reproduce across platforms.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint32_t next32() noexcept {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state_ >> 32);
    }
    /// Value in [0, bound) by multiply-shift on next32(); bound must be > 0.
    std::uint32_t below(std::uint32_t bound) noexcept {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(next32()) * bound) >> 32);
    }

private:
    std::uint64_t state_;
};

/// Fisher-Yates from the back: for i = n-1..1 swap(v[i], v[below(i+1)]).
template <typename T>
void lcg_shuffle(std::vector<T>& v, Lcg64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = rng.below(static_cast<std::uint32_t>(i));
        std::swap(v[i - 1], v[j]);
    }
}

struct FoldPlan {
    int k = 0;
    /// Fold index per sample, parallel to the input sample sequence.
    std::vector<int> assignments;

    std::vector<std::size_t> members(int fold) const;
};

/// Classes are visited in lexicographic order; each class's samples (in
/// input order) are shuffled with one Lcg64 seeded by `seed` and dealt
/// round-robin, the fold cursor carrying over from class to class.
FoldPlan stratified_kfold(const std::vector<Sample>& samples, int k, std::uint64_t seed);

struct EvalReport {
    int k = 0;
    std::uint64_t seed = 0;
    KnnConfig knn;
    std::optional<NeighborhoodSpec> spec;
    std::optional<PreprocessConfig> preprocess;

    std::vector<double> per_fold_accuracy;
    std::vector<std::size_t> fold_sizes;
    double mean_accuracy = 0.0;
    std::vector<std::string> classes;
    /// confusion[true][predicted], indices into `classes`.
    std::vector<std::vector<std::size_t>> confusion;

    std::size_t total() const;
    std::size_t correct() const;
};

/// Folds are evaluated in parallel; the result equals sequential evaluation.
EvalReport cross_validate(const std::vector<Sample>& samples, int k, const KnnConfig& cfg,
                          std::uint64_t seed);

/// Human-readable per-fold table plus confusion matrix.
std::string format_report(const EvalReport& report);
/// One row per report: T, metric, mean accuracy.
std::string format_sweep(const std::vector<EvalReport>& reports);
/// Deterministic JSON document; identical reports give identical bytes.
std::string report_json(const std::vector<EvalReport>& reports);

struct TimingStats {
    std::vector<double> per_image_ms;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;

    static TimingStats from(std::vector<double> samples_ms);
};

struct BenchmarkResult {
    /// extract() only, one entry per image x repetition.
    TimingStats extraction;
    /// File decode, one entry per image.
    TimingStats decode;
    /// Classification against a gallery, when one was supplied.
    std::optional<TimingStats> classification;
    double total_extraction_s = 0.0;
    std::size_t images = 0;
};

/// Times the pipeline on each image, single-threaded. Throws ImageError
/// naming the offending path if any image cannot be read.
BenchmarkResult benchmark_runtime(const std::vector<std::filesystem::path>& paths,
                                  const NeighborhoodSpec& spec, const PreprocessConfig& cfg,
                                  int repetitions, const KnnClassifier* gallery = nullptr,
                                  const KnnConfig& knn = {});

}  // namespace mlbp
