#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlbp/defaults.hpp"
#include "mlbp/descriptor.hpp"

namespace mlbp {

enum class Metric { Tanimoto, Euclidean };

std::string_view to_string(Metric m) noexcept;
/// Throws std::invalid_argument for anything but "tanimoto" / "euclidean".
Metric parse_metric(std::string_view name);

struct Sample {
    FeatureVector features;
    std::string label;
    int id = 0;
};

struct KnnConfig {
    int T = defaults::kKnnT;
    Metric metric = Metric::Tanimoto;

    bool operator==(const KnnConfig&) const = default;
};

struct Prediction {
    std::string label;
    std::vector<int> neighbor_ids;
    std::vector<double> neighbor_distances;
    std::map<std::string, int> vote_counts;
};

/// Soergel form of the Tanimoto distance:
/// sum(max - min) / sum(max), defined as 0 when both vectors are all zero.
/// Throws std::invalid_argument on a length mismatch or a negative entry.
double tanimoto_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);
double distance(Metric m, std::span<const double> a, std::span<const double> b);

/// Immutable training set. classify() is const and safe to call from many
/// threads at once.
class KnnClassifier {
public:
    explicit KnnClassifier(std::vector<Sample> train);

    std::size_t size() const noexcept { return train_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    const std::vector<Sample>& samples() const noexcept { return train_; }

    /// Majority vote among the T nearest samples. Distance ties go to the
    /// smaller sample id; vote ties to the smaller mean neighbour distance,
    /// then to the lexicographically smaller class name.
    Prediction classify(std::span<const double> query, const KnnConfig& cfg) const;

    /// One prediction per query, in input order. Parallel over queries.
    std::vector<Prediction> classify_all(const std::vector<FeatureVector>& queries,
                                         const KnnConfig& cfg) const;

private:
    std::vector<Sample> train_;
    std::size_t dim_;
};

Prediction knn_classify(const std::vector<Sample>& train, std::span<const double> query,
                        const KnnConfig& cfg);

}  // namespace mlbp
