#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lssd/error.hpp"

namespace lssd {

/// One of the four standard Bayer phases. The name spells the 2x2 cell
/// row-major, e.g. RGGB = {R G / G B}.
enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

enum class Channel { Red = 0, Green = 1, Blue = 2 };

inline const char* to_string(BayerPattern p) {
    switch (p) {
        case BayerPattern::RGGB: return "RGGB";
        case BayerPattern::BGGR: return "BGGR";
        case BayerPattern::GRBG: return "GRBG";
        case BayerPattern::GBRG: return "GBRG";
    }
    return "?";
}

inline BayerPattern parse_bayer_pattern(const std::string& s) {
    if (s == "RGGB") return BayerPattern::RGGB;
    if (s == "BGGR") return BayerPattern::BGGR;
    if (s == "GRBG") return BayerPattern::GRBG;
    if (s == "GBRG") return BayerPattern::GBRG;
    fail(ErrorKind::Metadata, "unknown bayer pattern '" + s + "'");
}

/// Channel captured at mosaic site (row, col) under the given phase.
inline Channel channel_at(BayerPattern p, int row, int col) {
    static constexpr Channel R = Channel::Red, G = Channel::Green, B = Channel::Blue;
    // cell[pattern][row%2][col%2]
    static constexpr std::array<std::array<std::array<Channel, 2>, 2>, 4> cell = {{
        {{{R, G}, {G, B}}},  // RGGB
        {{{B, G}, {G, R}}},  // BGGR
        {{{G, R}, {B, G}}},  // GRBG
        {{{G, B}, {R, G}}},  // GBRG
    }};
    return cell[static_cast<int>(p)][row & 1][col & 1];
}

/// Single-channel linear Bayer mosaic, the sensor-data stand-in.
/// Samples are row-major 16-bit linear intensities, all <= white_level.
struct CfaImage {
    int width = 0;
    int height = 0;
    BayerPattern pattern = BayerPattern::RGGB;
    uint16_t white_level = 65535;
    std::vector<uint16_t> samples;

    uint16_t at(int row, int col) const { return samples[static_cast<size_t>(row) * width + col]; }
    uint16_t& at(int row, int col) { return samples[static_cast<size_t>(row) * width + col]; }

    void validate() const {
        require(width >= 2 && height >= 2, ErrorKind::Invariant, "mosaic dimensions must be >= 2");
        require(width % 2 == 0 && height % 2 == 0, ErrorKind::Invariant,
                "mosaic dimensions must be even");
        require(samples.size() == static_cast<size_t>(width) * height, ErrorKind::Invariant,
                "sample count does not match dimensions");
        for (uint16_t s : samples) {
            require(s <= white_level, ErrorKind::Invariant, "sample above white level");
        }
    }
};

/// Planar 16-bit RGB working image. white_level tracks the meaningful
/// maximum inherited from the mosaic it was developed from.
struct RgbImage16 {
    int width = 0;
    int height = 0;
    uint16_t white_level = 65535;
    std::vector<uint16_t> r, g, b;

    static RgbImage16 allocate(int w, int h, uint16_t white = 65535) {
        RgbImage16 img;
        img.width = w;
        img.height = h;
        img.white_level = white;
        const size_t n = static_cast<size_t>(w) * h;
        img.r.assign(n, 0);
        img.g.assign(n, 0);
        img.b.assign(n, 0);
        return img;
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    std::vector<uint16_t>& plane(int c) { return c == 0 ? r : (c == 1 ? g : b); }
    const std::vector<uint16_t>& plane(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

struct RgbImage8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> r, g, b;

    static RgbImage8 allocate(int w, int h) {
        RgbImage8 img;
        img.width = w;
        img.height = h;
        const size_t n = static_cast<size_t>(w) * h;
        img.r.assign(n, 0);
        img.g.assign(n, 0);
        img.b.assign(n, 0);
        return img;
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    std::vector<uint8_t>& plane(int c) { return c == 0 ? r : (c == 1 ? g : b); }
    const std::vector<uint8_t>& plane(int c) const { return c == 0 ? r : (c == 1 ? g : b); }

    bool operator==(const RgbImage8&) const = default;
};

struct GreyImage8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    static GreyImage8 allocate(int w, int h, uint8_t fill = 0) {
        GreyImage8 img;
        img.width = w;
        img.height = h;
        img.pixels.assign(static_cast<size_t>(w) * h, fill);
        return img;
    }

    uint8_t at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
    uint8_t& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }

    bool operator==(const GreyImage8&) const = default;
};

}  // namespace lssd
