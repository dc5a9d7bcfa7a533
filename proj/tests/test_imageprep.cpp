#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mlbp/error.hpp"
#include "mlbp/imageprep.hpp"
#include "mlbp/serial.hpp"
#include "support/testdata.hpp"

using namespace mlbp;
using namespace mlbp::testing;

namespace {

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    REQUIRE(a.width() == b.width());
    REQUIRE(a.height() == b.height());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.pixels()[i] - b.pixels()[i]));
    return m;
}

// Direct 2-D convolution with replicate padding; kernel built here from the
// Gaussian formula, independently of gaussian_kernel().
GrayImage brute_force_smooth(const GrayImage& img, double sigma, int r) {
    std::vector<double> k;
    for (int i = -r; i <= r; ++i) k.push_back(std::exp(-(i * i) / (2 * sigma * sigma)));
    const double s = std::accumulate(k.begin(), k.end(), 0.0);
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j) {
                for (int i = -r; i <= r; ++i) {
                    const int xx = std::clamp(x + i, 0, img.width() - 1);
                    const int yy = std::clamp(y + j, 0, img.height() - 1);
                    acc += (k[i + r] / s) * (k[j + r] / s) * img.at(xx, yy);
                }
            }
            out[static_cast<std::size_t>(y) * img.width() + x] = acc;
        }
    }
    return GrayImage(img.width(), img.height(), std::move(out));
}

}  // namespace

TEST_CASE("GrayImage validates its invariants") {
    CHECK_THROWS_AS(GrayImage(0, 3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(1, 1, std::vector<double>{256.0}), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(1, 1, std::vector<double>{-0.5}), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(1, 1, std::vector<double>{std::nan("")}), std::invalid_argument);
}

TEST_CASE("rotate90 turns counter-clockwise and four turns are the identity") {
    const GrayImage img(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
    const GrayImage r = rotate90(img);
    CHECK(r.width() == 2);
    CHECK(r.height() == 3);
    // Top-right corner moves to top-left.
    CHECK(r.at(0, 0) == 3);
    CHECK(r.at(1, 0) == 6);
    CHECK(r.at(0, 2) == 1);
    CHECK(rotate90(rotate90(rotate90(r))) == img);
}

TEST_CASE("load_image decodes PGM") {
    TempDir dir;
    SUBCASE("binary P5") {
        write_text(dir / "a.pgm", std::string("P5\n2 2\n255\n") + std::string{'\x00', '\xff', '\x80', '\x40'});
        const auto img = load_image(dir / "a.pgm");
        CHECK(img.width() == 2);
        CHECK(img.height() == 2);
        CHECK(std::vector<double>(img.pixels().begin(), img.pixels().end()) == std::vector<double>{0, 255, 128, 64});
    }
    SUBCASE("ascii P2 with comments") {
        write_text(dir / "a.pgm", "P2\n# comment\n2 2\n# another\n255\n0 255\n128 64\n");
        const auto img = load_image(dir / "a.pgm");
        CHECK(std::vector<double>(img.pixels().begin(), img.pixels().end()) == std::vector<double>{0, 255, 128, 64});
    }
    SUBCASE("maxval other than 255 is rescaled") {
        write_text(dir / "a.pgm", "P2\n2 1\n15\n0 15\n");
        const auto img = load_image(dir / "a.pgm");
        CHECK(img.at(0, 0) == 0.0);
        CHECK(img.at(1, 0) == doctest::Approx(255.0));
    }
    SUBCASE("16-bit binary") {
        write_text(dir / "a.pgm", std::string("P5\n1 1\n65535\n") + std::string{'\xff', '\xff'});
        CHECK(load_image(dir / "a.pgm").at(0, 0) == doctest::Approx(255.0));
    }
}

TEST_CASE("load_image decodes PNG and converts RGB with BT.601 luminance") {
    TempDir dir;
    write_png_rgb(dir / "white.png", 1, 1, {255, 255, 255});
    write_png_rgb(dir / "grey.png", 1, 1, {100, 100, 100});
    write_png_rgb(dir / "red.png", 1, 1, {200, 0, 0});
    CHECK(load_image(dir / "white.png").at(0, 0) == 255.0);
    CHECK(load_image(dir / "grey.png").at(0, 0) == 100.0);
    CHECK(load_image(dir / "red.png").at(0, 0) == doctest::Approx(0.299 * 200).epsilon(1e-12));

    const GrayImage g(3, 2, std::vector<double>{0, 10, 20, 30, 40, 255});
    write_png_gray(dir / "g.png", g);
    CHECK(load_image(dir / "g.png") == g);
}

TEST_CASE("load_image reports distinct error kinds") {
    TempDir dir;
    auto kind_of = [](const std::filesystem::path& p) {
        try {
            (void)load_image(p);
        } catch (const ImageError& e) {
            return e.kind();
        }
        FAIL("expected ImageError");
        return ImageError::Kind::Malformed;
    };
    CHECK(kind_of(dir / "missing.pgm") == ImageError::Kind::Unreadable);
    write_text(dir / "note.txt", "hello");
    CHECK(kind_of(dir / "note.txt") == ImageError::Kind::UnsupportedFormat);
    write_text(dir / "zero.pgm", "P5\n0 3\n255\n");
    CHECK(kind_of(dir / "zero.pgm") == ImageError::Kind::ZeroDimension);
    write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
    CHECK(kind_of(dir / "short.pgm") == ImageError::Kind::Malformed);
    write_text(dir / "bad.png", "\x89PNG\r\n\x1a\ngarbage");
    CHECK(kind_of(dir / "bad.png") == ImageError::Kind::Malformed);
}

TEST_CASE("gaussian_kernel is normalized and symmetric") {
    for (double sigma : {0.3, 1.0, 2.5}) {
        for (int r : {1, 2, 5}) {
            const auto k = gaussian_kernel(sigma, r);
            CHECK(k.size() == static_cast<std::size_t>(2 * r + 1));
            CHECK(std::abs(std::accumulate(k.begin(), k.end(), 0.0) - 1.0) <= 1e-12);
            for (int i = 0; i < r; ++i) CHECK(k[i] == k[2 * r - i]);
        }
    }
    CHECK_THROWS_AS(gaussian_kernel(0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_kernel(1.0, 0), std::invalid_argument);
}

TEST_CASE("gaussian_smooth") {
    SUBCASE("preserves constants") {
        const GrayImage img(9, 7, 77.0);
        CHECK(max_abs_diff(gaussian_smooth(img, 1.0, 2), img) <= 1e-12);
    }
    SUBCASE("impulse response is the outer product of the 1-D kernels") {
        std::vector<double> px(21 * 21, 0.0);
        px[10 * 21 + 10] = 255.0;
        const auto out = gaussian_smooth(GrayImage(21, 21, px), 1.0, 2);
        const auto k = gaussian_kernel(1.0, 2);
        for (int y = 0; y < 21; ++y) {
            for (int x = 0; x < 21; ++x) {
                const int dx = x - 10;
                const int dy = y - 10;
                const double want = (std::abs(dx) <= 2 && std::abs(dy) <= 2) ? 255.0 * k[dx + 2] * k[dy + 2] : 0.0;
                CHECK(out.at(x, y) == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
    SUBCASE("matches a direct 2-D convolution on a 5x5 random image") {
        std::mt19937_64 rng(7);
        const auto img = random_real_image(5, 5, rng);
        CHECK(max_abs_diff(gaussian_smooth(img, 1.0, 2), brute_force_smooth(img, 1.0, 2)) <= 1e-9);
    }
    SUBCASE("non-square images and wide kernels against the oracle") {
        std::mt19937_64 rng(8);
        const auto img = random_image(11, 4, rng);
        CHECK(max_abs_diff(gaussian_smooth(img, 2.0, 6), brute_force_smooth(img, 2.0, 6)) <= 1e-9);
    }
    SUBCASE("parallel and serial kernels agree bit for bit") {
        std::mt19937_64 rng(9);
        const auto img = random_real_image(67, 41, rng);
        CHECK(gaussian_smooth(img, 1.3, 3) == serial::gaussian_smooth(img, 1.3, 3));
    }
}

TEST_CASE("resize_bilinear") {
    std::mt19937_64 rng(11);
    SUBCASE("identity when already W x W") {
        const auto img = random_real_image(16, 16, rng);
        CHECK(resize_bilinear(img, 16) == img);
    }
    SUBCASE("constants stay constant") {
        const auto out = resize_bilinear(GrayImage(13, 7, 42.5), 20);
        CHECK(out.width() == 20);
        CHECK(out.height() == 20);
        for (double v : out.pixels()) CHECK(v == doctest::Approx(42.5).epsilon(1e-14));
    }
    SUBCASE("4x4 ramp to 2x2") {
        // I(x, y) = 10 (x + 4y). Source coordinates are 0.5 and 2.5 on both
        // axes; bilinear reproduces a linear ramp exactly, so the outputs are
        // 10 (sx + 4 sy): 25, 45, 105, 125.
        std::vector<double> px;
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) px.push_back(10.0 * (x + 4 * y));
        const auto out = resize_bilinear(GrayImage(4, 4, px), 2);
        CHECK(out.at(0, 0) == doctest::Approx(25.0).epsilon(1e-12));
        CHECK(out.at(1, 0) == doctest::Approx(45.0).epsilon(1e-12));
        CHECK(out.at(0, 1) == doctest::Approx(105.0).epsilon(1e-12));
        CHECK(out.at(1, 1) == doctest::Approx(125.0).epsilon(1e-12));
    }
    SUBCASE("upsampling clamps to the source edge") {
        const auto out = resize_bilinear(GrayImage(2, 1, std::vector<double>{0, 100}), 4);
        // Source x = (d + 0.5) / 2 - 0.5: -0.25 -> 0, 0.25, 0.75, 1.25 -> 1.
        CHECK(out.at(0, 0) == 0.0);
        CHECK(out.at(1, 0) == doctest::Approx(25.0));
        CHECK(out.at(2, 0) == doctest::Approx(75.0));
        CHECK(out.at(3, 0) == 100.0);
    }
    CHECK_THROWS_AS(resize_bilinear(GrayImage(2, 2, 1.0), 0), std::invalid_argument);
}

TEST_CASE("preprocess composes smoothing and resizing") {
    PreprocessConfig cfg;
    SUBCASE("constant 64x64 becomes constant 128x128") {
        const auto out = preprocess(GrayImage(64, 64, 33.0), cfg);
        CHECK(out.width() == 128);
        for (double v : out.pixels()) CHECK(v == doctest::Approx(33.0).epsilon(1e-12));
    }
    SUBCASE("identity pipeline") {
        std::mt19937_64 rng(3);
        const auto img = random_real_image(128, 128, rng);
        cfg.smoothing_enabled = false;
        CHECK(preprocess(img, cfg) == img);
    }
    SUBCASE("explicit composition on a 256x256 image") {
        std::mt19937_64 rng(4);
        const auto img = random_real_image(256, 256, rng);
        CHECK(preprocess(img, cfg) == resize_bilinear(gaussian_smooth(img, 1.0, 2), 128));
    }
    SUBCASE("invalid configs are rejected") {
        cfg.gaussian_sigma = -1;
        CHECK_THROWS_AS(preprocess(GrayImage(4, 4, 1.0), cfg), std::invalid_argument);
    }
}

TEST_CASE("property: smoothing and resizing keep intensities in range and commute with rot90") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8 + static_cast<int>(rng() % 40);
        const auto img = trial % 2 ? random_image(n, n, rng) : binary_noise(n, rng);
        const auto s = gaussian_smooth(img, 0.5 + (rng() % 20) / 10.0, 1 + static_cast<int>(rng() % 4));
        for (double v : s.pixels()) CHECK((v >= 0.0 && v <= 255.0));
        CHECK(max_abs_diff(gaussian_smooth(rotate90(img), 1.0, 2), rotate90(gaussian_smooth(img, 1.0, 2))) <= 1e-9);

        const int target = 3 + static_cast<int>(rng() % 60);
        const auto r = resize_bilinear(img, target);
        for (double v : r.pixels()) CHECK((v >= 0.0 && v <= 255.0));
        CHECK(max_abs_diff(resize_bilinear(rotate90(img), target), rotate90(r)) <= 1e-9);
    }
}
