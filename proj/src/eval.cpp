#include "mlbp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mlbp/error.hpp"
#include "mlbp/parallel.hpp"

namespace mlbp {

std::vector<std::size_t> FoldPlan::members(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(i);
    }
    return out;
}

FoldPlan stratified_kfold(const std::vector<Sample>& samples, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("fold count must be >= 2");
    if (samples.empty()) throw DataError("cannot build folds for an empty dataset");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label.empty()) throw DataError("sample " + std::to_string(samples[i].id) + " has no label");
        by_class[samples[i].label].push_back(i);
    }

    FoldPlan plan{k, std::vector<int>(samples.size(), -1)};
    Lcg64 rng(seed);
    int cursor = 0;
    for (auto& [label, indices] : by_class) {
        lcg_shuffle(indices, rng);
        for (auto idx : indices) {
            plan.assignments[idx] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    return plan;
}

std::size_t EvalReport::total() const {
    std::size_t n = 0;
    for (const auto& row : confusion) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return n;
}

std::size_t EvalReport::correct() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i) n += confusion[i][i];
    return n;
}

EvalReport cross_validate(const std::vector<Sample>& samples, int k, const KnnConfig& cfg,
                          std::uint64_t seed) {
    const FoldPlan plan = stratified_kfold(samples, k, seed);
    if (samples.size() < static_cast<std::size_t>(k)) {
        throw DataError("need at least " + std::to_string(k) + " samples for " + std::to_string(k) +
                        "-fold cross-validation, got " + std::to_string(samples.size()));
    }

    EvalReport report;
    report.k = k;
    report.seed = seed;
    report.knn = cfg;
    if (!samples.front().features.scales.empty() && samples.front().features.scales.size() == 1) {
        report.spec = samples.front().features.scales.front();
    }

    std::map<std::string, std::size_t> class_index;
    for (const auto& s : samples) class_index.emplace(s.label, 0);
    for (auto& [name, idx] : class_index) {
        idx = report.classes.size();
        report.classes.push_back(name);
    }
    const std::size_t nc = report.classes.size();

    // Validate split sizes before doing any work.
    for (int f = 0; f < k; ++f) {
        const auto held_out = static_cast<std::size_t>(
            std::count(plan.assignments.begin(), plan.assignments.end(), f));
        const std::size_t train_size = samples.size() - held_out;
        if (train_size < static_cast<std::size_t>(cfg.T)) {
            throw DataError("T = " + std::to_string(cfg.T) + " exceeds training split size " +
                            std::to_string(train_size) + " in fold " + std::to_string(f));
        }
    }

    using Matrix = std::vector<std::vector<std::size_t>>;
    std::vector<Matrix> fold_confusion(k, Matrix(nc, std::vector<std::size_t>(nc, 0)));
    std::vector<std::size_t> fold_correct(k, 0);
    std::vector<std::size_t> fold_size(k, 0);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < k; ++f) {
        try {
            std::vector<Sample> train;
            std::vector<std::size_t> test;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (plan.assignments[i] == f) {
                    test.push_back(i);
                } else {
                    train.push_back(samples[i]);
                }
            }
            const KnnClassifier model(std::move(train));
            for (auto i : test) {
                const auto pred = model.classify(samples[i].features.values, cfg);
                const auto t = class_index.at(samples[i].label);
                const auto p = class_index.at(pred.label);
                ++fold_confusion[f][t][p];
                if (t == p) ++fold_correct[f];
            }
            fold_size[f] = test.size();
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    report.confusion.assign(nc, std::vector<std::size_t>(nc, 0));
    std::size_t correct = 0;
    for (int f = 0; f < k; ++f) {
        report.fold_sizes.push_back(fold_size[f]);
        report.per_fold_accuracy.push_back(
            fold_size[f] ? static_cast<double>(fold_correct[f]) / static_cast<double>(fold_size[f]) : 0.0);
        correct += fold_correct[f];
        for (std::size_t t = 0; t < nc; ++t) {
            for (std::size_t p = 0; p < nc; ++p) report.confusion[t][p] += fold_confusion[f][t][p];
        }
    }
    report.mean_accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    return report;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string format_report(const EvalReport& r) {
    std::ostringstream out;
    out << r.k << "-fold cross-validation, T=" << r.knn.T << ", metric=" << to_string(r.knn.metric)
        << ", seed=" << r.seed << "\n";
    out << "fold  size  accuracy\n";
    for (std::size_t f = 0; f < r.per_fold_accuracy.size(); ++f) {
        char line[96];
        std::snprintf(line, sizeof line, "%4zu  %4zu  %s\n", f, r.fold_sizes[f],
                      fixed(r.per_fold_accuracy[f], 4).c_str());
        out << line;
    }
    out << "mean accuracy: " << fixed(r.mean_accuracy, 3) << " (" << r.correct() << "/" << r.total()
        << ")\n";
    out << "confusion (rows = true, columns = predicted):\n";
    std::size_t width = 6;
    for (const auto& c : r.classes) width = std::max(width, c.size() + 1);
    auto pad = [width](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
    out << pad("");
    for (const auto& c : r.classes) out << pad(c);
    out << "\n";
    for (std::size_t t = 0; t < r.classes.size(); ++t) {
        out << pad(r.classes[t]);
        for (std::size_t p = 0; p < r.classes.size(); ++p) out << pad(std::to_string(r.confusion[t][p]));
        out << "\n";
    }
    return out.str();
}

std::string format_sweep(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "T  metric     mean_accuracy\n";
    for (const auto& r : reports) {
        char line[96];
        std::snprintf(line, sizeof line, "%-2d %-10s %s\n", r.knn.T,
                      std::string(to_string(r.knn.metric)).c_str(), fixed(r.mean_accuracy, 4).c_str());
        out << line;
    }
    return out.str();
}

std::string report_json(const std::vector<EvalReport>& reports) {
    using nlohmann::ordered_json;
    ordered_json runs = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json j;
        j["folds"] = r.k;
        j["seed"] = r.seed;
        j["knn"] = {{"T", r.knn.T}, {"metric", std::string(to_string(r.knn.metric))}};
        if (r.spec) {
            j["neighborhood"] = {{"P", r.spec->neighbors()},
                                 {"R", r.spec->radius()},
                                 {"UT", r.spec->threshold()}};
        }
        if (r.preprocess) {
            j["preprocess"] = {{"W", r.preprocess->target_size},
                               {"sigma", r.preprocess->gaussian_sigma},
                               {"kernel_radius", r.preprocess->kernel_radius},
                               {"smoothing", r.preprocess->smoothing_enabled}};
        }
        j["per_fold_accuracy"] = r.per_fold_accuracy;
        j["fold_sizes"] = r.fold_sizes;
        j["mean_accuracy"] = r.mean_accuracy;
        j["classes"] = r.classes;
        j["confusion"] = r.confusion;
        runs.push_back(std::move(j));
    }
    ordered_json doc;
    doc["runs"] = std::move(runs);
    return doc.dump(2) + "\n";
}

TimingStats TimingStats::from(std::vector<double> samples_ms) {
    TimingStats s;
    s.per_image_ms = std::move(samples_ms);
    if (s.per_image_ms.empty()) return s;
    std::vector<double> sorted = s.per_image_ms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    s.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.min_ms = sorted.front();
    s.max_ms = sorted.back();
    // Guard the mean against summation rounding on near-constant lists.
    s.mean_ms = std::clamp(s.mean_ms, s.min_ms, s.max_ms);
    return s;
}

BenchmarkResult benchmark_runtime(const std::vector<std::filesystem::path>& paths,
                                  const NeighborhoodSpec& spec, const PreprocessConfig& cfg,
                                  int repetitions, const KnnClassifier* gallery, const KnnConfig& knn) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (paths.empty()) throw std::invalid_argument("no images to benchmark");
    cfg.validate();

    using Clock = std::chrono::steady_clock;
    auto ms_since = [](Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    const ScopedThreadLimit single_thread(1);
    std::vector<double> extract_ms;
    std::vector<double> decode_ms;
    std::vector<double> classify_ms;
    for (const auto& path : paths) {
        auto t0 = Clock::now();
        const GrayImage img = load_image(path);
        decode_ms.push_back(ms_since(t0));
        for (int r = 0; r < repetitions; ++r) {
            t0 = Clock::now();
            const FeatureVector f = extract(img, spec, cfg);
            extract_ms.push_back(ms_since(t0));
            if (gallery) {
                t0 = Clock::now();
                (void)gallery->classify(f.values, knn);
                classify_ms.push_back(ms_since(t0));
            }
        }
    }

    BenchmarkResult out;
    out.images = paths.size();
    out.total_extraction_s = std::accumulate(extract_ms.begin(), extract_ms.end(), 0.0) / 1000.0;
    out.extraction = TimingStats::from(std::move(extract_ms));
    out.decode = TimingStats::from(std::move(decode_ms));
    if (gallery) out.classification = TimingStats::from(std::move(classify_ms));
    return out;
}

}  // namespace mlbp
