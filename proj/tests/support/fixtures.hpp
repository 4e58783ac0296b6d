#pragma once

// Deterministic synthetic scenes for tests: smooth gradients plus sinusoidal
// texture and seeded noise, so compression behaves like it does on natural
// content while every byte stays reproducible.

#include <algorithm>
#include <cmath>

#include "lssd/image.hpp"
#include "lssd/rawio.hpp"
#include "lssd/rng.hpp"

namespace lssd::testfix {

inline RgbImage16 synthetic_scene(int w, int h, uint64_t key, double noise_amp = 500.0) {
    RgbImage16 img = RgbImage16::allocate(w, h, 65535);
    rng::Stream noise(key, 0x5CE11Eull, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double fx = static_cast<double>(x) / w;
            const double fy = static_cast<double>(y) / h;
            const double lum = 20000.0 + 20000.0 * fx + 12000.0 * fy +
                               8000.0 * std::sin(x * 0.021) * std::cos(y * 0.017) +
                               3000.0 * std::sin((x + 2 * y) * 0.0043);
            const double warm = 4000.0 * std::cos(y * 0.009);
            const double cool = 3500.0 * std::sin(x * 0.012);
            auto jitter = [&] { return noise_amp * (noise.uniform() - 0.5); };
            auto clamp16 = [](double v) {
                return static_cast<uint16_t>(std::clamp(v, 0.0, 65535.0));
            };
            img.r[i] = clamp16(lum + warm + jitter());
            img.g[i] = clamp16(lum + 1500.0 + jitter());
            img.b[i] = clamp16(lum + cool + jitter());
        }
    }
    return img;
}

inline CfaImage synthetic_mosaic(int w, int h, BayerPattern pattern, uint64_t key) {
    return simulate_cfa(synthetic_scene(w, h, key), pattern);
}

inline GreyImage8 textured_tile(uint64_t key) {
    GreyImage8 img = GreyImage8::allocate(256, 256);
    rng::Stream noise(key, 0x71D3ull, 0);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            double v = 120.0 + 70.0 * std::sin(x * 0.045) * std::cos(y * 0.031) +
                       25.0 * std::sin((x + y) * 0.013) + 10.0 * (noise.uniform() - 0.5);
            img.at(y, x) = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return img;
}

inline RgbImage8 textured_colour_tile(uint64_t key) {
    const GreyImage8 base = textured_tile(key);
    RgbImage8 img = RgbImage8::allocate(256, 256);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        img.r[i] = base.pixels[i];
        img.g[i] = static_cast<uint8_t>(std::clamp(base.pixels[i] + 25, 0, 255));
        img.b[i] = static_cast<uint8_t>(255 - base.pixels[i]);
    }
    return img;
}

/// Constant-channel scene, for stages that must preserve constants.
inline RgbImage16 constant_scene(int w, int h, uint16_t r, uint16_t g, uint16_t b) {
    RgbImage16 img = RgbImage16::allocate(w, h, 65535);
    std::fill(img.r.begin(), img.r.end(), r);
    std::fill(img.g.begin(), img.g.end(), g);
    std::fill(img.b.begin(), img.b.end(), b);
    return img;
}

}  // namespace lssd::testfix
