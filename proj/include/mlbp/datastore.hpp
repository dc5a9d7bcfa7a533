#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlbp/classify.hpp"
#include "mlbp/descriptor.hpp"
#include "mlbp/imageprep.hpp"

namespace mlbp {

struct ManifestEntry {
    std::filesystem::path path;
    std::string label;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    /// Non-fatal findings, e.g. empty class directories.
    std::vector<std::string> warnings;
};

/// CSV with header `path,label`. Relative paths resolve against the
/// manifest's directory. LF and CRLF are both accepted.
Manifest read_manifest(const std::filesystem::path& csv);

/// One class per immediate subdirectory; PGM/PNG files inside it. Entries
/// are ordered by class name, then file name. Deeper directories are ignored.
Manifest scan_directory(const std::filesystem::path& root);

struct FeatureRow {
    int id = 0;
    std::string label;
    std::vector<double> values;
};

struct FeatureStore {
    NeighborhoodSpec spec;
    PreprocessConfig preprocess;
    std::vector<FeatureRow> rows;

    std::vector<Sample> samples() const;
};

/// First line of every store file, e.g. `# mlbp P=8 R=1.0 UT=2 W=128 sigma=1.0`.
/// Disabled smoothing is written as sigma=0; a non-default kernel radius
/// appends ` kernel=N`.
std::string store_header(const NeighborhoodSpec& spec, const PreprocessConfig& cfg);

/// Written to a sibling temporary file and renamed into place.
void write_features(const std::filesystem::path& path, const FeatureStore& store);

/// Throws DataError on malformed content and on a spec that differs from
/// `expected_spec` / `expected_preprocess` when those are given.
FeatureStore read_features(const std::filesystem::path& path,
                           const std::optional<NeighborhoodSpec>& expected_spec = std::nullopt,
                           const std::optional<PreprocessConfig>& expected_preprocess = std::nullopt);

/// True when the file starts with the store header marker.
bool looks_like_store(const std::filesystem::path& path);

}  // namespace mlbp
