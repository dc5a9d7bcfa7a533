#include "mlbp/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "mlbp/error.hpp"

namespace mlbp {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStoreMarker = "# mlbp";
constexpr double kStoreSumTolerance = 1e-6;

std::string chomp(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError("unterminated quoted field", line_no);
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Shortest round-trip decimal, always with a fractional part ("1.0").
std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = text.substr(0, text.find_last_not_of(" \t") + 1);
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_int(std::string_view text, int& out) {
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

}  // namespace

Manifest read_manifest(const fs::path& csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw DataError("cannot open manifest " + csv.string());
    const fs::path base = csv.has_parent_path() ? csv.parent_path() : fs::path(".");

    Manifest m;
    std::set<fs::path> seen;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(std::move(line));
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_csv(line, line_no);
        if (!header) {
            if (fields.size() != 2 || trim(fields[0]) != "path" || trim(fields[1]) != "label") {
                throw DataError("missing header 'path,label'", line_no);
            }
            header = true;
            continue;
        }
        if (fields.size() != 2) {
            throw DataError("expected 2 fields, got " + std::to_string(fields.size()), line_no);
        }
        const std::string rel = trim(fields[0]);
        const std::string label = trim(fields[1]);
        if (rel.empty()) throw DataError("empty path", line_no);
        if (label.empty()) throw DataError("empty label", line_no);
        fs::path p(rel);
        if (p.is_relative()) p = base / p;
        p = p.lexically_normal();
        if (!seen.insert(p).second) throw DataError("duplicate path '" + rel + "'", line_no);
        m.entries.push_back({std::move(p), label});
    }
    if (!header) throw DataError("missing header 'path,label'", line_no ? line_no : 1);
    return m;
}

Manifest scan_directory(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw DataError("not a directory: " + root.string());

    std::vector<fs::path> classes;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) classes.push_back(e.path());
    }
    if (classes.empty()) throw DataError("no class subdirectories under " + root.string());
    std::sort(classes.begin(), classes.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    Manifest m;
    for (const auto& dir : classes) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
        if (files.empty()) m.warnings.push_back("class directory " + dir.string() + " has no images");
        const std::string label = dir.filename().string();
        for (auto& f : files) m.entries.push_back({std::move(f), label});
    }
    return m;
}

std::vector<Sample> FeatureStore::samples() const {
    std::vector<Sample> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({FeatureVector{r.values, {spec}}, r.label, r.id});
    return out;
}

std::string store_header(const NeighborhoodSpec& spec, const PreprocessConfig& cfg) {
    std::ostringstream h;
    h << kStoreMarker << " P=" << spec.neighbors() << " R=" << format_real(spec.radius())
      << " UT=" << spec.threshold() << " W=" << cfg.target_size
      << " sigma=" << (cfg.smoothing_enabled ? format_real(cfg.gaussian_sigma) : std::string("0"));
    if (cfg.smoothing_enabled && cfg.kernel_radius != defaults::kKernelRadius) {
        h << " kernel=" << cfg.kernel_radius;
    }
    return h.str();
}

void write_features(const fs::path& path, const FeatureStore& store) {
    const int bins = store.spec.bins();
    for (const auto& r : store.rows) {
        if (static_cast<int>(r.values.size()) != bins) {
            throw DataError("row " + std::to_string(r.id) + " has " + std::to_string(r.values.size()) +
                            " values, expected " + std::to_string(bins));
        }
    }
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw DataError("output directory does not exist: " + dir.string());

    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << store_header(store.spec, store.preprocess) << "\n";
        out << "id,label";
        for (int i = 0; i < bins; ++i) out << ",f" << i;
        out << "\n";
        for (const auto& r : store.rows) {
            out << r.id << "," << csv_field(r.label);
            for (double v : r.values) out << "," << format_real(v);
            out << "\n";
        }
        out.flush();
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("cannot move store into place at " + path.string() + ": " + ec.message());
    }
}

namespace {

struct ParsedHeader {
    NeighborhoodSpec spec;
    PreprocessConfig preprocess;
};

ParsedHeader parse_store_header(const std::string& line) {
    if (line.rfind(kStoreMarker, 0) != 0) throw DataError("missing '# mlbp' store header", 1);
    std::istringstream tokens(line.substr(kStoreMarker.size()));
    std::optional<int> p, ut, w, kernel;
    std::optional<double> r, sigma;
    std::string tok;
    while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw DataError("bad header token '" + tok + "'", 1);
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        int iv = 0;
        double dv = 0.0;
        if ((key == "P" || key == "UT" || key == "W" || key == "kernel") && parse_int(val, iv)) {
            (key == "P" ? p : key == "UT" ? ut : key == "W" ? w : kernel) = iv;
        } else if ((key == "R" || key == "sigma") && parse_double(val, dv)) {
            (key == "R" ? r : sigma) = dv;
        } else {
            throw DataError("bad header token '" + tok + "'", 1);
        }
    }
    if (!p || !r || !ut || !w || !sigma) throw DataError("store header must record P, R, UT, W and sigma", 1);
    try {
        ParsedHeader h{NeighborhoodSpec(*p, *r, *ut), PreprocessConfig{}};
        h.preprocess.target_size = *w;
        h.preprocess.smoothing_enabled = *sigma > 0.0;
        if (h.preprocess.smoothing_enabled) h.preprocess.gaussian_sigma = *sigma;
        if (kernel) h.preprocess.kernel_radius = *kernel;
        h.preprocess.validate();
        return h;
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid store header: ") + e.what(), 1);
    }
}

std::string describe(const NeighborhoodSpec& s, const PreprocessConfig& c) {
    return store_header(s, c).substr(kStoreMarker.size() + 1);
}

bool same_preprocess(const PreprocessConfig& a, const PreprocessConfig& b) {
    if (a.target_size != b.target_size || a.smoothing_enabled != b.smoothing_enabled) return false;
    if (!a.smoothing_enabled) return true;
    return a.gaussian_sigma == b.gaussian_sigma && a.kernel_radius == b.kernel_radius;
}

}  // namespace

bool looks_like_store(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string first;
    return in && std::getline(in, first) && first.rfind(kStoreMarker, 0) == 0;
}

FeatureStore read_features(const fs::path& path, const std::optional<NeighborhoodSpec>& expected_spec,
                           const std::optional<PreprocessConfig>& expected_preprocess) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature store " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature store " + path.string());
    ParsedHeader header = parse_store_header(chomp(line));

    const NeighborhoodSpec& spec = header.spec;
    if ((expected_spec && !(*expected_spec == spec)) ||
        (expected_preprocess && !same_preprocess(*expected_preprocess, header.preprocess))) {
        throw DataError("spec mismatch: store has '" + describe(spec, header.preprocess) + "', requested '" +
                        describe(expected_spec.value_or(spec), expected_preprocess.value_or(header.preprocess)) +
                        "'");
    }

    const int bins = spec.bins();
    if (!std::getline(in, line)) throw DataError("missing column header", 2);
    {
        const auto cols = split_csv(chomp(line), 2);
        if (cols.size() < 2 || cols[0] != "id" || cols[1] != "label") {
            throw DataError("column header must start with 'id,label'", 2);
        }
        if (static_cast<int>(cols.size()) != bins + 2) {
            throw DataError("dimension mismatch: header has " + std::to_string(cols.size() - 2) +
                                " feature columns, spec P=" + std::to_string(spec.neighbors()) + " needs " +
                                std::to_string(bins),
                            2);
        }
    }

    FeatureStore store{spec, header.preprocess, {}};
    std::set<int> ids;
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(std::move(line));
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line, line_no);
        if (static_cast<int>(fields.size()) != bins + 2) {
            throw DataError("row has " + std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(bins + 2),
                            line_no);
        }
        FeatureRow row;
        if (!parse_int(trim(fields[0]), row.id)) throw DataError("bad id '" + fields[0] + "'", line_no);
        if (!ids.insert(row.id).second) throw DataError("duplicate id " + std::to_string(row.id), line_no);
        row.label = fields[1];
        if (row.label.empty()) throw DataError("empty label", line_no);
        double sum = 0.0;
        for (int i = 0; i < bins; ++i) {
            double v = 0.0;
            if (!parse_double(fields[i + 2], v)) throw DataError("bad value '" + fields[i + 2] + "'", line_no);
            if (v < 0.0) throw DataError("negative feature value", line_no);
            row.values.push_back(v);
            sum += v;
        }
        if (std::abs(sum - 1.0) > kStoreSumTolerance) {
            throw DataError("row does not sum to 1 (sum = " + format_real(sum) + ")", line_no);
        }
        store.rows.push_back(std::move(row));
    }
    return store;
}

}  // namespace mlbp
