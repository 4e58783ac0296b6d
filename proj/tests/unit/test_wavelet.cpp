#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "lssd/develop.hpp"
#include "lssd/rng.hpp"
#include "lssd/wavelet.hpp"
#include "support/fixtures.hpp"

using namespace lssd;

namespace {

std::vector<int32_t> random_plane(int w, int h, uint64_t key) {
    std::vector<int32_t> plane(static_cast<size_t>(w) * h);
    rng::Stream s(key, 0x3A3A, 0);
    for (auto& v : plane) v = static_cast<int32_t>(s.uniform_int(65536));
    return plane;
}

double texture_energy(const RgbImage16& img) {
    // energy of the residual against a heavy blur, summed over channels
    double energy = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& p = img.plane(c);
        for (int y = 2; y < img.height - 2; ++y) {
            for (int x = 2; x < img.width - 2; ++x) {
                double acc = 0.0;
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        acc += p[static_cast<size_t>(y + dy) * img.width + (x + dx)];
                    }
                }
                const double d = p[static_cast<size_t>(y) * img.width + x] - acc / 25.0;
                energy += d * d;
            }
        }
    }
    return energy;
}

}  // namespace

TEST_CASE("5/3 lifting reconstructs bit-exactly, odd and even sizes") {
    uint64_t key = 10;
    for (auto [w, h] : {std::pair{64, 64}, {37, 53}, {128, 96}, {17, 9}, {8, 8}}) {
        std::vector<int32_t> plane = random_plane(w, h, key++);
        const std::vector<int32_t> original = plane;
        const auto plan = wavelet::plan_levels(w, h, 4);
        wavelet::forward(plane.data(), w, plan);
        if (w >= 8 && h >= 8) CHECK(plane != original);  // something actually happened
        wavelet::inverse(plane.data(), w, plan);
        CHECK(plane == original);
    }
}

TEST_CASE("constant planes have zero detail coefficients") {
    const int w = 32, h = 32;
    std::vector<int32_t> plane(static_cast<size_t>(w) * h, 777);
    const auto plan = wavelet::plan_levels(w, h, 4);
    wavelet::forward(plane.data(), w, plan);
    // outside the final approx quadrant everything must be zero
    const auto& last = plan.back();
    const int lw = last.lw, lh = last.lh;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (y < lh && x < lw) continue;
            REQUIRE(plane[static_cast<size_t>(y) * w + x] == 0);
        }
    }
}

TEST_CASE("pyramid denoise: zero intensity is the identity") {
    const RgbImage16 img = testfix::synthetic_scene(96, 64, 4, 3000.0);
    const RgbImage16 out = pyramid_denoise(img, 0.0, 17);
    CHECK(out.r == img.r);
    CHECK(out.g == img.g);
    CHECK(out.b == img.b);
}

TEST_CASE("pyramid denoise: detail 40 restores the input") {
    const RgbImage16 img = testfix::synthetic_scene(96, 96, 5, 3000.0);
    const RgbImage16 out = pyramid_denoise(img, 35.0, 40);
    CHECK(out.r == img.r);
    CHECK(out.g == img.g);
    CHECK(out.b == img.b);
}

TEST_CASE("pyramid denoise: constants pass through for all parameters") {
    const RgbImage16 img = testfix::constant_scene(64, 64, 1234, 4321, 9999);
    for (double intensity : {0.0, 15.0, 60.0}) {
        for (int detail : {0, 20, 40}) {
            const RgbImage16 out = pyramid_denoise(img, intensity, detail);
            CHECK(out.r == img.r);
            CHECK(out.g == img.g);
            CHECK(out.b == img.b);
        }
    }
}

TEST_CASE("pyramid denoise: detail retains texture, intensity removes it") {
    const RgbImage16 noisy = testfix::synthetic_scene(128, 128, 6, 6000.0);

    const double full_detail = texture_energy(pyramid_denoise(noisy, 40.0, 40));
    const double no_detail = texture_energy(pyramid_denoise(noisy, 40.0, 0));
    CHECK(full_detail >= no_detail);

    const double light = texture_energy(pyramid_denoise(noisy, 5.0, 0));
    const double heavy = texture_energy(pyramid_denoise(noisy, 55.0, 0));
    CHECK(heavy <= light);
}

TEST_CASE("pyramid denoise rejects out-of-range parameters") {
    const RgbImage16 img = testfix::constant_scene(16, 16, 1, 1, 1);
    CHECK_THROWS_AS(pyramid_denoise(img, -1.0, 0), Error);
    CHECK_THROWS_AS(pyramid_denoise(img, 61.0, 0), Error);
    CHECK_THROWS_AS(pyramid_denoise(img, 10.0, 41), Error);
}
