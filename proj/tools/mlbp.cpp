// mlbp: texture-descriptor extraction, nearest-neighbour classification,
// cross-validation and runtime benchmarking from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlbp/classify.hpp"
#include "mlbp/datastore.hpp"
#include "mlbp/defaults.hpp"
#include "mlbp/descriptor.hpp"
#include "mlbp/error.hpp"
#include "mlbp/eval.hpp"
#include "mlbp/imageprep.hpp"

namespace fs = std::filesystem;
using namespace mlbp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DescriptorFlags {
    int neighbors = defaults::kNeighbors;
    double radius = defaults::kRadius;
    int threshold = defaults::kUniformityThreshold;
    int size = defaults::kTargetSize;
    double sigma = defaults::kSigma;
    bool no_smooth = false;

    CLI::Option* neighbors_opt = nullptr;
    CLI::Option* radius_opt = nullptr;
    CLI::Option* threshold_opt = nullptr;
    CLI::Option* size_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* no_smooth_opt = nullptr;

    void add_to(CLI::App* app) {
        neighbors_opt = app->add_option("--neighbors", neighbors, "Neighbour count P")->capture_default_str();
        radius_opt = app->add_option("--radius", radius, "Sampling radius R")->capture_default_str();
        threshold_opt = app->add_option("--uniformity-threshold", threshold,
                                        "Uniformity threshold U_T (default floor(P/4); 2 for P=8)");
        size_opt = app->add_option("--size", size, "Canonical image size W (W x W)")->capture_default_str();
        sigma_opt = app->add_option("--sigma", sigma, "Gaussian smoothing sigma (5x5 kernel)")
                        ->capture_default_str();
        no_smooth_opt = app->add_flag("--no-smooth", no_smooth, "Disable Gaussian smoothing");
    }

    bool any_given() const {
        return neighbors_opt->count() || radius_opt->count() || threshold_opt->count() || size_opt->count() ||
               sigma_opt->count() || no_smooth_opt->count();
    }

    NeighborhoodSpec spec() const {
        try {
            return NeighborhoodSpec(neighbors, radius,
                                    threshold_opt->count() ? std::optional<int>(threshold) : std::nullopt);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    PreprocessConfig preprocess() const {
        PreprocessConfig cfg;
        cfg.target_size = size;
        cfg.gaussian_sigma = sigma;
        cfg.smoothing_enabled = !no_smooth;
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (size < 2 * spec().margin() + 2) {
            throw UsageError("--size must be at least 2*ceil(R)+2 = " + std::to_string(2 * spec().margin() + 2));
        }
        return cfg;
    }
};

struct KnnFlags {
    int T = defaults::kKnnT;
    std::string metric = defaults::kMetric;

    void add_to(CLI::App* app) {
        app->add_option("--knn", T, "Number of nearest neighbours T")->capture_default_str();
        app->add_option("--metric", metric, "Distance metric")
            ->check(CLI::IsMember({"tanimoto", "euclidean"}))
            ->capture_default_str();
    }

    KnnConfig config() const {
        if (T < 1) throw UsageError("--knn must be >= 1");
        return {T, parse_metric(metric)};
    }
};

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Manifest load_inputs(const fs::path& input) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) return scan_directory(input);
    if (!fs::exists(input, ec)) throw DataError("input not found: " + input.string());
    return read_manifest(input);
}

struct Extracted {
    std::vector<FeatureRow> rows;
    std::vector<std::string> failures;
};

// Parallel over images; rows come back in manifest order.
Extracted extract_manifest(const Manifest& manifest, const NeighborhoodSpec& spec, const PreprocessConfig& cfg) {
    const auto n = static_cast<std::ptrdiff_t>(manifest.entries.size());
    std::vector<std::optional<FeatureRow>> slots(manifest.entries.size());
    std::vector<std::string> errors(manifest.entries.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& e = manifest.entries[i];
        try {
            const auto f = extract(load_image(e.path), spec, cfg);
            slots[i] = FeatureRow{static_cast<int>(i), e.label, f.values};
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }
    Extracted out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) {
            out.rows.push_back(std::move(*slots[i]));
        } else {
            out.failures.push_back(errors[i]);
        }
    }
    return out;
}

void print_warnings(const Manifest& m) {
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<fs::path> expand_images(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& s : inputs) {
        const fs::path p(s);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                auto ext = e.path().extension().string();
                std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
                if (e.is_regular_file() && (ext == ".pgm" || ext == ".png")) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

// ---------------------------------------------------------------- extract

int cmd_extract(const std::string& input, const fs::path& output, bool skip_errors, const DescriptorFlags& df) {
    const auto spec = df.spec();
    const auto cfg = df.preprocess();
    const Manifest manifest = load_inputs(input);
    print_warnings(manifest);
    if (manifest.entries.empty()) throw DataError("no images found in " + input);

    std::cerr << "extracting " << manifest.entries.size() << " images (" << store_header(spec, cfg).substr(2)
              << ")\n";
    auto result = extract_manifest(manifest, spec, cfg);
    for (const auto& f : result.failures) std::cerr << "error: " << f << "\n";
    if (!result.failures.empty() && !skip_errors) {
        std::cerr << result.failures.size() << " image(s) failed; nothing written (use --skip-errors to continue)\n";
        return kExitData;
    }
    if (!result.failures.empty()) {
        std::cerr << "warning: skipped " << result.failures.size() << " image(s)\n";
    }
    write_features(output, FeatureStore{spec, cfg, std::move(result.rows)});
    std::cerr << "wrote " << (manifest.entries.size() - result.failures.size()) << " rows to " << output.string()
              << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- classify

int cmd_classify(const fs::path& store_path, const std::vector<std::string>& queries, const DescriptorFlags& df,
                 const KnnFlags& kf) {
    const auto knn = kf.config();
    const std::optional<NeighborhoodSpec> want_spec =
        df.any_given() ? std::optional<NeighborhoodSpec>(df.spec()) : std::nullopt;
    const std::optional<PreprocessConfig> want_cfg =
        df.any_given() ? std::optional<PreprocessConfig>(df.preprocess()) : std::nullopt;
    const FeatureStore store = read_features(store_path, want_spec, want_cfg);
    if (store.rows.empty()) throw DataError("feature store " + store_path.string() + " is empty");
    const KnnClassifier model(store.samples());

    for (const auto& q : queries) {
        const auto f = extract(load_image(q), store.spec, store.preprocess);
        const auto pred = model.classify(f.values, knn);
        std::ostringstream line;
        line << q << "\t" << pred.label << "\t";
        for (std::size_t i = 0; i < pred.neighbor_ids.size(); ++i) {
            char d[32];
            std::snprintf(d, sizeof d, "%.6f", pred.neighbor_distances[i]);
            line << (i ? " " : "") << pred.neighbor_ids[i] << ":" << d;
        }
        std::cout << line.str() << "\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------- crossval

int cmd_crossval(const std::string& input, const std::optional<fs::path>& output, bool sweep, int folds,
                 unsigned long long seed, const DescriptorFlags& df, const KnnFlags& kf) {
    if (folds < 2) throw UsageError("--folds must be >= 2");
    const auto knn = kf.config();

    std::vector<Sample> samples;
    NeighborhoodSpec spec = df.spec();
    PreprocessConfig cfg = df.preprocess();
    std::error_code ec;
    if (!fs::is_directory(input, ec) && looks_like_store(input)) {
        const FeatureStore store = read_features(
            input, df.any_given() ? std::optional<NeighborhoodSpec>(spec) : std::nullopt,
            df.any_given() ? std::optional<PreprocessConfig>(cfg) : std::nullopt);
        spec = store.spec;
        cfg = store.preprocess;
        samples = store.samples();
    } else {
        const Manifest manifest = load_inputs(input);
        print_warnings(manifest);
        auto result = extract_manifest(manifest, spec, cfg);
        if (!result.failures.empty()) {
            for (const auto& f : result.failures) std::cerr << "error: " << f << "\n";
            return kExitData;
        }
        samples = FeatureStore{spec, cfg, std::move(result.rows)}.samples();
    }

    std::vector<KnnConfig> grid;
    if (sweep) {
        for (Metric m : {Metric::Tanimoto, Metric::Euclidean}) {
            for (int t : {1, 3, 5}) grid.push_back({t, m});
        }
    } else {
        grid.push_back(knn);
    }

    std::vector<EvalReport> reports;
    for (const auto& k : grid) {
        auto r = cross_validate(samples, folds, k, seed);
        r.spec = spec;
        r.preprocess = cfg;
        reports.push_back(std::move(r));
    }

    if (sweep) {
        std::cout << format_sweep(reports);
    } else {
        std::cout << format_report(reports.front());
    }
    if (output) write_text_file(*output, report_json(reports));
    return kExitOk;
}

// ------------------------------------------------------------------ bench

int cmd_bench(const std::vector<std::string>& inputs, int repetitions, const std::optional<fs::path>& store_path,
              const DescriptorFlags& df, const KnnFlags& kf) {
    if (repetitions < 1) throw UsageError("--repetitions must be >= 1");
    const auto spec = df.spec();
    const auto cfg = df.preprocess();
    const auto knn = kf.config();
    const auto paths = expand_images(inputs);
    if (paths.empty()) throw DataError("no images to benchmark");

    std::optional<KnnClassifier> gallery;
    if (store_path) gallery.emplace(read_features(*store_path, spec, cfg).samples());

    const auto r = benchmark_runtime(paths, spec, cfg, repetitions, gallery ? &*gallery : nullptr, knn);

    auto row = [](const char* name, const TimingStats& s) {
        char line[160];
        std::snprintf(line, sizeof line, "%-16s n=%-5zu mean=%9.3f ms  median=%9.3f ms  max=%9.3f ms\n", name,
                      s.per_image_ms.size(), s.mean_ms, s.median_ms, s.max_ms);
        return std::string(line);
    };
    std::cout << "images: " << r.images << ", repetitions: " << repetitions << ", timing entries: "
              << r.extraction.per_image_ms.size() << "\n";
    std::cout << row("extract", r.extraction);
    std::cout << row("decode", r.decode);
    if (r.classification) std::cout << row("classify", *r.classification);
    char total[128];
    std::snprintf(total, sizeof total, "total extraction: %.3f s\n", r.total_extraction_s);
    std::cout << total;
    char ref[192];
    std::snprintf(ref, sizeof ref, "reference: %.0f ms per image (%d images in %.2f s); measured mean %.3f ms (%s)\n",
                  defaults::kReferenceMsPerImage, defaults::kReferenceBatchImages, defaults::kReferenceBatchSeconds,
                  r.extraction.mean_ms,
                  r.extraction.mean_ms <= defaults::kReferenceMsPerImage ? "within reference" : "slower than reference");
    std::cout << ref;
    return kExitOk;
}

// ---------------------------------------------------------------- inspect

int cmd_inspect(const fs::path& image, bool apply_preprocess, const std::optional<fs::path>& output,
                const DescriptorFlags& df) {
    const auto spec = df.spec();
    GrayImage img = load_image(image);
    if (apply_preprocess) img = preprocess(img, df.preprocess());
    const auto labels = label_image(img, spec);
    const auto hist = histogram_features(labels, spec);

    std::ostringstream grid;
    for (int y = 0; y < labels.height(); ++y) {
        for (int x = 0; x < labels.width(); ++x) grid << (x ? " " : "") << labels.at(x, y);
        grid << "\n";
    }
    std::ostringstream h;
    h << "histogram:";
    for (std::size_t i = 0; i < hist.values.size(); ++i) h << " f" << i << "=" << format_real(hist.values[i]);
    h << "\n";

    if (output) {
        write_text_file(*output, grid.str());
    } else {
        std::cout << "labels " << labels.width() << "x" << labels.height() << ":\n" << grid.str();
    }
    std::cout << h.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MLBP texture descriptors with Tanimoto nearest-neighbour classification"};
    app.require_subcommand(1);

    DescriptorFlags df_extract, df_classify, df_crossval, df_bench, df_inspect;
    KnnFlags kf_classify, kf_crossval, kf_bench;

    std::string extract_input;
    std::string extract_output;
    bool skip_errors = false;
    auto* extract = app.add_subcommand("extract", "Extract feature vectors for a manifest CSV or class directory");
    extract->add_option("input", extract_input, "Manifest CSV (path,label) or directory of class subdirectories")
        ->required();
    extract->add_option("--output,-o", extract_output, "Feature store CSV to write")->required();
    extract->add_flag("--skip-errors", skip_errors, "Skip unreadable images instead of failing");
    df_extract.add_to(extract);

    std::string classify_store;
    std::vector<std::string> classify_queries;
    auto* classify = app.add_subcommand("classify", "Classify query images against a feature store");
    classify->add_option("store", classify_store, "Training feature store")->required();
    classify->add_option("queries", classify_queries, "Query images")->required();
    df_classify.add_to(classify);
    kf_classify.add_to(classify);

    std::string crossval_input;
    std::string crossval_output;
    bool sweep = false;
    int folds = defaults::kFolds;
    unsigned long long seed = defaults::kSeed;
    auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
    crossval->add_option("input", crossval_input, "Feature store, manifest CSV or class directory")->required();
    crossval->add_option("--output,-o", crossval_output, "Write a JSON report here");
    crossval->add_flag("--sweep", sweep, "Evaluate T in {1,3,5} x {tanimoto,euclidean}");
    crossval->add_option("--folds", folds, "Fold count k")->capture_default_str();
    crossval->add_option("--seed", seed, "Fold shuffling seed")->capture_default_str();
    df_crossval.add_to(crossval);
    kf_crossval.add_to(crossval);

    std::vector<std::string> bench_inputs;
    int repetitions = 1;
    std::string bench_store;
    auto* bench = app.add_subcommand("bench", "Time per-image feature extraction");
    bench->add_option("images", bench_inputs, "Image files or directories")->required();
    bench->add_option("--repetitions", repetitions, "Timed extractions per image")->capture_default_str();
    bench->add_option("--store", bench_store, "Also time classification against this feature store");
    df_bench.add_to(bench);
    kf_bench.add_to(bench);

    std::string inspect_image;
    std::string inspect_output;
    bool inspect_preprocess = false;
    auto* inspect = app.add_subcommand("inspect", "Dump the per-pixel label map and histogram of one image");
    inspect->add_option("image", inspect_image, "Image file")->required();
    inspect->add_flag("--preprocess", inspect_preprocess, "Smooth and resize before labelling");
    inspect->add_option("--output,-o", inspect_output, "Write the label grid here instead of stdout");
    df_inspect.add_to(inspect);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
    try {
        if (extract->parsed()) return cmd_extract(extract_input, extract_output, skip_errors, df_extract);
        if (classify->parsed()) return cmd_classify(classify_store, classify_queries, df_classify, kf_classify);
        if (crossval->parsed()) {
            return cmd_crossval(crossval_input, opt_path(crossval_output), sweep, folds, seed, df_crossval,
                                kf_crossval);
        }
        if (bench->parsed()) return cmd_bench(bench_inputs, repetitions, opt_path(bench_store), df_bench, kf_bench);
        if (inspect->parsed()) {
            return cmd_inspect(inspect_image, inspect_preprocess, opt_path(inspect_output), df_inspect);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
