#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mlbp/datastore.hpp"
#include "support/testdata.hpp"

using namespace mlbp;
using namespace mlbp::testing;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MLBP_CLI_PATH;

CommandResult cli(const std::string& args, bool merge_stderr = false) {
    return run_command(kCli + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null"));
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// male/: 3 images, female/: 2 images, distinct textures per class.
void make_dataset(const fs::path& root) {
    std::mt19937_64 rng(61);
    fs::create_directories(root / "male");
    fs::create_directories(root / "female");
    for (int i = 0; i < 3; ++i) write_pgm(root / "male" / ("m" + std::to_string(i) + ".pgm"), binary_noise(40, rng));
    for (int i = 0; i < 2; ++i) write_png_gray(root / "female" / ("f" + std::to_string(i) + ".png"), smoothed_noise(40, rng));
}

void write_separable_store(const fs::path& path) {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> jitter(0.0, 0.01);
    FeatureStore store{NeighborhoodSpec(), PreprocessConfig(), {}};
    for (int i = 0; i < 60; ++i) {
        std::vector<double> v(10, 0.01);
        v[i % 2 ? 8 : 9] = 0.8;
        for (auto& x : v) x += jitter(rng);
        double s = 0.0;
        for (double x : v) s += x;
        for (auto& x : v) x /= s;
        store.rows.push_back({i, i % 2 ? "smooth" : "rough", v});
    }
    write_features(path, store);
}

}  // namespace

TEST_CASE("cli: usage errors exit with 1 and --help documents defaults") {
    CHECK(cli("").exit_code == 1);
    CHECK(cli("frobnicate").exit_code == 1);
    CHECK(cli("inspect x.pgm --bogus").exit_code == 1);
    CHECK(cli("inspect x.pgm --neighbors 2").exit_code == 1);
    CHECK(cli("crossval x.csv --metric cosine").exit_code == 1);

    const auto help = cli("crossval --help");
    CHECK(help.exit_code == 0);
    for (const char* needle : {"--neighbors INT [8]", "--radius FLOAT [1]", "floor(P/4)", "--size INT [128]",
                               "--sigma FLOAT [1]", "--knn INT [3]", "[tanimoto]", "--folds INT [10]", "--seed UINT [42]",
                               "--no-smooth", "--sweep"}) {
        CHECK_MESSAGE(help.out.find(needle) != std::string::npos, needle);
    }
}

TEST_CASE("cli: extract") {
    TempDir dir;
    make_dataset(dir / "data");
    SUBCASE("directory of 5 images gives 5 rows") {
        const auto r = cli("extract " + q(dir / "data") + " --output " + q(dir / "f.csv"));
        CHECK(r.exit_code == 0);
        const auto store = read_features(dir / "f.csv", NeighborhoodSpec(), PreprocessConfig());
        REQUIRE(store.rows.size() == 5);
        CHECK(store.rows[0].label == "female");
        CHECK(store.rows[4].label == "male");
        for (std::size_t i = 0; i < 5; ++i) CHECK(store.rows[i].id == static_cast<int>(i));
    }
    SUBCASE("manifest input and non-default flags") {
        write_text(dir / "m.csv", "path,label\ndata/male/m0.pgm,male\ndata/female/f1.png,female\n");
        const auto r = cli("extract " + q(dir / "m.csv") + " -o " + q(dir / "f.csv") +
                           " --neighbors 16 --radius 2 --size 64 --no-smooth");
        CHECK(r.exit_code == 0);
        PreprocessConfig cfg;
        cfg.target_size = 64;
        cfg.smoothing_enabled = false;
        const auto store = read_features(dir / "f.csv", NeighborhoodSpec(16, 2.0), cfg);
        CHECK(store.rows.size() == 2);
        CHECK(store.rows[0].values.size() == 18);
    }
    SUBCASE("corrupt image fails unless --skip-errors") {
        write_text(dir / "data" / "male" / "broken.pgm", "P5\n40 40\n255\nshort");
        const auto fail = cli("extract " + q(dir / "data") + " -o " + q(dir / "f.csv"), true);
        CHECK(fail.exit_code == 2);
        CHECK(fail.out.find("broken.pgm") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "f.csv"));

        const auto skip = cli("extract " + q(dir / "data") + " -o " + q(dir / "f.csv") + " --skip-errors", true);
        CHECK(skip.exit_code == 0);
        CHECK(skip.out.find("warning") != std::string::npos);
        // 5 good images + 1 broken.
        CHECK(read_features(dir / "f.csv").rows.size() == 5);
    }
    SUBCASE("unwritable output") {
        CHECK(cli("extract " + q(dir / "data") + " -o " + q(dir / "no/such/dir/f.csv")).exit_code == 2);
    }
}

TEST_CASE("cli: extract with --skip-errors keeps four of five rows") {
    TempDir dir;
    make_dataset(dir / "data");
    fs::remove(dir / "data" / "male" / "m2.pgm");
    write_text(dir / "data" / "male" / "m2.pgm", "not an image");
    const auto r = cli("extract " + q(dir / "data") + " -o " + q(dir / "f.csv") + " --skip-errors", true);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("m2.pgm") != std::string::npos);
    CHECK(read_features(dir / "f.csv").rows.size() == 4);
}

TEST_CASE("cli: classify") {
    TempDir dir;
    make_dataset(dir / "data");
    REQUIRE(cli("extract " + q(dir / "data") + " -o " + q(dir / "f.csv")).exit_code == 0);

    SUBCASE("a stored image classifies as itself at distance 0") {
        const auto r = cli("classify " + q(dir / "f.csv") + " " + q(dir / "data/male/m1.pgm") + " --knn 1");
        CHECK(r.exit_code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 1);
        CHECK(ls[0].find("\tmale\t") != std::string::npos);
        CHECK(ls[0].find("3:0.000000") != std::string::npos);
    }
    SUBCASE("two queries, two lines, input order") {
        const auto r = cli("classify " + q(dir / "f.csv") + " " + q(dir / "data/male/m0.pgm") + " " +
                           q(dir / "data/female/f0.png"));
        CHECK(r.exit_code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 2);
        CHECK(ls[0].rfind((dir / "data/male/m0.pgm").string(), 0) == 0);
        CHECK(ls[1].rfind((dir / "data/female/f0.png").string(), 0) == 0);
        // Three neighbours listed per line.
        CHECK(std::count(ls[0].begin(), ls[0].end(), ':') == 3);
    }
    SUBCASE("T larger than the store") {
        CHECK(cli("classify " + q(dir / "f.csv") + " " + q(dir / "data/male/m0.pgm") + " --knn 6").exit_code == 2);
    }
    SUBCASE("explicit flags must match the store") {
        CHECK(cli("classify " + q(dir / "f.csv") + " " + q(dir / "data/male/m0.pgm") + " --neighbors 16")
                  .exit_code == 2);
    }
    SUBCASE("empty store") {
        write_text(dir / "empty.csv", "# mlbp P=8 R=1.0 UT=2 W=128 sigma=1.0\nid,label,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9\n");
        CHECK(cli("classify " + q(dir / "empty.csv") + " " + q(dir / "data/male/m0.pgm")).exit_code == 2);
    }
}

TEST_CASE("cli: crossval") {
    TempDir dir;
    write_separable_store(dir / "sep.csv");
    SUBCASE("separable store scores 1.000") {
        const auto r = cli("crossval " + q(dir / "sep.csv"));
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("mean accuracy: 1.000") != std::string::npos);
        CHECK(r.out.find("confusion") != std::string::npos);
    }
    SUBCASE("--sweep prints six rows") {
        const auto r = cli("crossval " + q(dir / "sep.csv") + " --sweep -o " + q(dir / "r.json"));
        CHECK(r.exit_code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 7);
        CHECK(ls[1].find("tanimoto") != std::string::npos);
        CHECK(ls[6].find("euclidean") != std::string::npos);
        CHECK(read_text(dir / "r.json").find("\"runs\"") != std::string::npos);
    }
    SUBCASE("same seed, identical report files") {
        REQUIRE(cli("crossval " + q(dir / "sep.csv") + " --seed 7 -o " + q(dir / "a.json")).exit_code == 0);
        REQUIRE(cli("crossval " + q(dir / "sep.csv") + " --seed 7 -o " + q(dir / "b.json")).exit_code == 0);
        CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));
        CHECK_FALSE(read_text(dir / "a.json").empty());
    }
    SUBCASE("image directory input") {
        make_dataset(dir / "data");
        const auto r = cli("crossval " + q(dir / "data") + " --folds 2 --knn 1");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("2-fold") != std::string::npos);
    }
    SUBCASE("too few samples for k") {
        make_dataset(dir / "data");
        CHECK(cli("crossval " + q(dir / "data") + " --folds 10 --knn 1").exit_code == 2);
        CHECK(cli("crossval " + q(dir / "data") + " --folds 1").exit_code == 1);
    }
}

TEST_CASE("cli: bench") {
    TempDir dir;
    make_dataset(dir / "data");
    const auto r = cli("bench " + q(dir / "data/male/m0.pgm") + " " + q(dir / "data/male/m1.pgm") + " " +
                       q(dir / "data/female/f0.png") + " --repetitions 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("timing entries: 6") != std::string::npos);
    CHECK(r.out.find("reference: 519 ms per image (90 images in 46.73 s)") != std::string::npos);
    CHECK(r.out.find("median=") != std::string::npos);

    REQUIRE(cli("extract " + q(dir / "data") + " -o " + q(dir / "f.csv")).exit_code == 0);
    const auto g = cli("bench " + q(dir / "data") + " --store " + q(dir / "f.csv"));
    CHECK(g.exit_code == 0);
    CHECK(g.out.find("classify") != std::string::npos);

    CHECK(cli("bench " + q(dir / "nope.pgm")).exit_code == 2);
}

TEST_CASE("cli: inspect") {
    TempDir dir;
    write_pgm(dir / "flat.pgm", GrayImage(10, 10, 90.0));
    const auto r = cli("inspect " + q(dir / "flat.pgm"));
    CHECK(r.exit_code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 10);
    CHECK(ls[0] == "labels 8x8:");
    for (int i = 1; i <= 8; ++i) CHECK(ls[i] == "8 8 8 8 8 8 8 8");
    CHECK(ls[9] == "histogram: f0=0 f1=0 f2=0 f3=0 f4=0 f5=0 f6=0 f7=0 f8=1 f9=0");

    std::mt19937_64 rng(63);
    write_pgm(dir / "noise.pgm", random_image(10, 10, rng));
    const auto n = cli("inspect " + q(dir / "noise.pgm") + " -o " + q(dir / "grid.txt"));
    CHECK(n.exit_code == 0);
    CHECK(lines(read_text(dir / "grid.txt")).size() == 8);
    const auto hist = lines(n.out).back();
    double sum = 0.0;
    for (std::size_t pos = hist.find('='); pos != std::string::npos; pos = hist.find('=', pos + 1)) {
        sum += std::stod(hist.substr(pos + 1));
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    const auto pre = cli("inspect " + q(dir / "noise.pgm") + " --preprocess --size 20");
    CHECK(lines(pre.out).front() == "labels 18x18:");
    CHECK(cli("inspect " + q(dir / "missing.pgm")).exit_code == 2);
}
