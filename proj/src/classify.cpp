#include "mlbp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "mlbp/error.hpp"

namespace mlbp {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
}

}  // namespace

std::string_view to_string(Metric m) noexcept {
    return m == Metric::Tanimoto ? "tanimoto" : "euclidean";
}

Metric parse_metric(std::string_view name) {
    if (name == "tanimoto") return Metric::Tanimoto;
    if (name == "euclidean") return Metric::Euclidean;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

double tanimoto_distance(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    double diff = 0.0;
    double union_sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < 0.0 || b[k] < 0.0) throw std::invalid_argument("tanimoto distance needs nonnegative entries");
        const double hi = std::max(a[k], b[k]);
        const double lo = std::min(a[k], b[k]);
        diff += hi - lo;
        union_sum += hi;
    }
    return union_sum == 0.0 ? 0.0 : diff / union_sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b);
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double distance(Metric m, std::span<const double> a, std::span<const double> b) {
    return m == Metric::Tanimoto ? tanimoto_distance(a, b) : euclidean_distance(a, b);
}

KnnClassifier::KnnClassifier(std::vector<Sample> train) : train_(std::move(train)), dim_(0) {
    if (train_.empty()) throw DataError("training set is empty");
    dim_ = train_.front().features.size();
    for (const auto& s : train_) {
        if (s.features.size() != dim_) {
            throw DataError("sample " + std::to_string(s.id) + " has dimension " +
                            std::to_string(s.features.size()) + ", expected " + std::to_string(dim_));
        }
    }
    std::vector<int> ids(train_.size());
    std::transform(train_.begin(), train_.end(), ids.begin(), [](const Sample& s) { return s.id; });
    std::sort(ids.begin(), ids.end());
    if (const auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
        throw DataError("duplicate sample id " + std::to_string(*dup));
    }
}

Prediction KnnClassifier::classify(std::span<const double> query, const KnnConfig& cfg) const {
    if (cfg.T < 1) throw std::invalid_argument("T must be >= 1");
    if (static_cast<std::size_t>(cfg.T) > train_.size()) {
        throw DataError("T = " + std::to_string(cfg.T) + " exceeds training set size " +
                        std::to_string(train_.size()));
    }
    if (query.size() != dim_) {
        throw std::invalid_argument("query dimension " + std::to_string(query.size()) +
                                    " does not match training dimension " + std::to_string(dim_));
    }

    struct Candidate {
        double dist;
        int id;
        std::size_t index;
    };
    std::vector<Candidate> cand(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i) {
        cand[i] = {distance(cfg.metric, query, train_[i].features.values), train_[i].id, i};
    }
    const auto by_distance_then_id = [](const Candidate& l, const Candidate& r) {
        return l.dist != r.dist ? l.dist < r.dist : l.id < r.id;
    };
    std::partial_sort(cand.begin(), cand.begin() + cfg.T, cand.end(), by_distance_then_id);

    Prediction p;
    std::map<std::string, double> distance_sum;
    for (int k = 0; k < cfg.T; ++k) {
        const auto& c = cand[k];
        const auto& label = train_[c.index].label;
        p.neighbor_ids.push_back(c.id);
        p.neighbor_distances.push_back(c.dist);
        ++p.vote_counts[label];
        distance_sum[label] += c.dist;
    }

    // std::map iterates names in lexicographic order, so the strict
    // comparisons below leave the smallest name in place on a full tie.
    const std::string* best = nullptr;
    int best_votes = 0;
    double best_mean = 0.0;
    for (const auto& [label, votes] : p.vote_counts) {
        const double mean = distance_sum[label] / votes;
        if (!best || votes > best_votes || (votes == best_votes && mean < best_mean)) {
            best = &label;
            best_votes = votes;
            best_mean = mean;
        }
    }
    p.label = *best;
    return p;
}

std::vector<Prediction> KnnClassifier::classify_all(const std::vector<FeatureVector>& queries,
                                                    const KnnConfig& cfg) const {
    std::vector<Prediction> out(queries.size());
    const auto n = static_cast<std::ptrdiff_t>(queries.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = classify(queries[i].values, cfg);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

Prediction knn_classify(const std::vector<Sample>& train, std::span<const double> query,
                        const KnnConfig& cfg) {
    return KnnClassifier(train).classify(query, cfg);
}

}  // namespace mlbp
