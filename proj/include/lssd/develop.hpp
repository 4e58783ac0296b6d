#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lssd/error.hpp"
#include "lssd/image.hpp"
#include "lssd/recipe.hpp"
#include "lssd/wavelet.hpp"

namespace lssd {

// Per-image development chain:
//   demosaic -> resize/crop -> (USM | pyramid denoise) -> micro-contrast
//   -> 8-bit quantize -> {colour tiling; grey conversion then tiling}
// Everything up to the 8-bit step works on 16-bit planes.

inline constexpr double kUsmRadius = 1.0;       // blur sigma for the sharpening mask
inline constexpr double kMaxUpscaleFactor = 4.0;

namespace detail {

inline int reflect_index(int i, int n) {
    // mirror about the edge sample; preserves Bayer phase (period-2 parity)
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return i;
}

inline uint16_t clamp_to_u16(double v, uint16_t white) {
    if (v <= 0.0) return 0;
    const double w = static_cast<double>(white);
    if (v >= w) return white;
    return static_cast<uint16_t>(std::llround(v));
}

inline uint8_t round_to_u8(double v) {
    if (v <= 0.0) return 0;
    if (v >= 255.0) return 255;
    return static_cast<uint8_t>(std::floor(v + 0.5));
}

}  // namespace detail

/// Nearest-neighbor demosaic: every output channel value is the sample of
/// the closest site carrying that channel (ties resolved toward the
/// same-row, then same-column neighbor). Measured sites pass through.
inline RgbImage16 demosaic_fast(const CfaImage& cfa) {
    RgbImage16 out = RgbImage16::allocate(cfa.width, cfa.height, cfa.white_level);
    const int w = cfa.width, h = cfa.height;
    const uint16_t* src = cfa.samples.data();

    // candidate offsets in preference order: self, E, W, S, N, SE, SW, NE, NW
    static constexpr int off[9][2] = {{0, 0}, {0, 1},  {0, -1}, {1, 0},  {-1, 0},
                                      {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

    // resolve the winning offset once per (phase, channel)
    int pick[2][2][3][2];
    for (int py = 0; py < 2; ++py) {
        for (int px = 0; px < 2; ++px) {
            for (int c = 0; c < 3; ++c) {
                for (const auto& o : off) {
                    if (channel_at(cfa.pattern, py + o[0], px + o[1]) ==
                        static_cast<Channel>(c)) {
                        pick[py][px][c][0] = o[0];
                        pick[py][px][c][1] = o[1];
                        break;
                    }
                }
            }
        }
    }

    for (int y = 0; y < h; ++y) {
        const bool y_interior = y >= 1 && y < h - 1;
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const auto& offs = pick[y & 1][x & 1];
            if (y_interior && x >= 1 && x < w - 1) {
                for (int c = 0; c < 3; ++c) {
                    out.plane(c)[i] =
                        src[static_cast<size_t>(y + offs[c][0]) * w + (x + offs[c][1])];
                }
            } else {
                for (int c = 0; c < 3; ++c) {
                    // reflection keeps the Bayer phase, so the picked offset
                    // still lands on the right channel at the border
                    const int yy = detail::reflect_index(y + offs[c][0], h);
                    const int xx = detail::reflect_index(x + offs[c][1], w);
                    out.plane(c)[i] = src[static_cast<size_t>(yy) * w + xx];
                }
            }
        }
    }
    return out;
}

/// Gradient-corrected bilinear demosaic (5x5 linear filters). Higher quality
/// than nearest-neighbor; measured sites pass through unchanged.
inline RgbImage16 demosaic_gradient(const CfaImage& cfa) {
    RgbImage16 out = RgbImage16::allocate(cfa.width, cfa.height, cfa.white_level);
    const int w = cfa.width, h = cfa.height;
    const uint16_t* src = cfa.samples.data();
    const uint16_t white = cfa.white_level;

    auto process = [&](int y, int x, auto&& sample) {
        const size_t i = static_cast<size_t>(y) * w + x;
        const Channel site = channel_at(cfa.pattern, y, x);
        const double c0 = src[i];

        const double diag = sample(y - 1, x - 1) + sample(y - 1, x + 1) + sample(y + 1, x - 1) +
                            sample(y + 1, x + 1);
        const double hh = sample(y, x - 2) + sample(y, x + 2);
        const double vv = sample(y - 2, x) + sample(y + 2, x);

        if (site == Channel::Green) {
            // horizontal neighbors carry either R or B depending on the row
            const bool red_row = channel_at(cfa.pattern, y, x + 1) == Channel::Red;
            const double horiz = sample(y, x - 1) + sample(y, x + 1);
            const double vert = sample(y - 1, x) + sample(y + 1, x);
            const double est_h = (5.0 * c0 + 4.0 * horiz - diag - vv + 0.5 * hh) / 8.0;
            const double est_v = (5.0 * c0 + 4.0 * vert - diag - hh + 0.5 * vv) / 8.0;
            out.g[i] = src[i];
            out.r[i] = detail::clamp_to_u16(red_row ? est_h : est_v, white);
            out.b[i] = detail::clamp_to_u16(red_row ? est_v : est_h, white);
        } else {
            const double cross = sample(y, x - 1) + sample(y, x + 1) + sample(y - 1, x) +
                                 sample(y + 1, x);
            const double axial2 = hh + vv;
            const double green = (4.0 * c0 + 2.0 * cross - axial2) / 8.0;
            const double opposite = (6.0 * c0 + 2.0 * diag - 1.5 * axial2) / 8.0;
            if (site == Channel::Red) {
                out.r[i] = src[i];
                out.g[i] = detail::clamp_to_u16(green, white);
                out.b[i] = detail::clamp_to_u16(opposite, white);
            } else {
                out.b[i] = src[i];
                out.g[i] = detail::clamp_to_u16(green, white);
                out.r[i] = detail::clamp_to_u16(opposite, white);
            }
        }
    };

    auto direct = [&](int y, int x) -> double { return src[static_cast<size_t>(y) * w + x]; };
    auto mirrored = [&](int y, int x) -> double {
        return src[static_cast<size_t>(detail::reflect_index(y, h)) * w +
                   detail::reflect_index(x, w)];
    };

    for (int y = 0; y < h; ++y) {
        if (y >= 2 && y < h - 2) {
            for (int x = 0; x < 2; ++x) process(y, x, mirrored);
            for (int x = 2; x < w - 2; ++x) process(y, x, direct);
            for (int x = std::max(2, w - 2); x < w; ++x) process(y, x, mirrored);
        } else {
            for (int x = 0; x < w; ++x) process(y, x, mirrored);
        }
    }
    return out;
}

inline RgbImage16 demosaic(const CfaImage& cfa, DemosaicMethod method) {
    cfa.validate();
    return method == DemosaicMethod::Fast ? demosaic_fast(cfa) : demosaic_gradient(cfa);
}

namespace detail {

struct Tap {
    int idx[4] = {0, 0, 0, 0};  // source indices, already edge-clamped
    double weight[4] = {0};
    int count = 0;
};

inline double keys_cubic(double s) {
    constexpr double a = -0.5;
    s = std::fabs(s);
    if (s <= 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
    if (s < 2.0) return (((s - 5.0) * s + 8.0) * s - 4.0) * a;
    return 0.0;
}

inline std::vector<Tap> make_taps(int src_n, int dst_n, ResizeKernel kernel) {
    std::vector<Tap> taps(static_cast<size_t>(dst_n));
    const double ratio = static_cast<double>(src_n) / dst_n;
    for (int d = 0; d < dst_n; ++d) {
        const double pos = (d + 0.5) * ratio - 0.5;
        Tap& t = taps[static_cast<size_t>(d)];
        int first = 0;
        switch (kernel) {
            case ResizeKernel::Nearest: {
                first = static_cast<int>(std::floor(pos + 0.5));
                t.weight[0] = 1.0;
                t.count = 1;
                break;
            }
            case ResizeKernel::Bilinear: {
                first = static_cast<int>(std::floor(pos));
                const double f = pos - first;
                t.weight[0] = 1.0 - f;
                t.weight[1] = f;
                t.count = 2;
                break;
            }
            case ResizeKernel::Bicubic: {
                const int i0 = static_cast<int>(std::floor(pos));
                const double f = pos - i0;
                first = i0 - 1;
                for (int k = 0; k < 4; ++k) t.weight[k] = keys_cubic(f + 1.0 - k);
                t.count = 4;
                break;
            }
        }
        for (int k = 0; k < t.count; ++k) t.idx[k] = std::clamp(first + k, 0, src_n - 1);
    }
    return taps;
}

// one separable pass along x; rows unchanged
inline void resample_rows(const std::vector<double>& src, int sw, int sh,
                          const std::vector<Tap>& taps, std::vector<double>& dst, int dw) {
    dst.resize(static_cast<size_t>(dw) * sh);
    for (int y = 0; y < sh; ++y) {
        const double* srow = src.data() + static_cast<size_t>(y) * sw;
        double* drow = dst.data() + static_cast<size_t>(y) * dw;
        for (int x = 0; x < dw; ++x) {
            const Tap& t = taps[static_cast<size_t>(x)];
            double acc = 0.0;
            for (int k = 0; k < t.count; ++k) acc += t.weight[k] * srow[t.idx[k]];
            drow[x] = acc;
        }
    }
}

inline void resample_cols(const std::vector<double>& src, int w, int sh,
                          const std::vector<Tap>& taps, std::vector<double>& dst, int dh) {
    (void)sh;
    dst.assign(static_cast<size_t>(w) * dh, 0.0);
    for (int y = 0; y < dh; ++y) {
        const Tap& t = taps[static_cast<size_t>(y)];
        double* drow = dst.data() + static_cast<size_t>(y) * w;
        for (int k = 0; k < t.count; ++k) {
            const double* srow = src.data() + static_cast<size_t>(t.idx[k]) * w;
            const double wgt = t.weight[k];
            for (int x = 0; x < w; ++x) drow[x] += wgt * srow[x];
        }
    }
}

}  // namespace detail

/// Proportional resize so the short side equals target_side, then center
/// crop to target_side x target_side. Upscaling beyond a fixed policy
/// factor is rejected; milder upscaling is allowed (callers record it).
inline RgbImage16 resize_crop(const RgbImage16& img, ResizeKernel kernel, int target_side) {
    require(img.width >= 1 && img.height >= 1, ErrorKind::Argument, "empty image");
    require(target_side >= 8, ErrorKind::Argument, "target side too small");
    const int short_side = std::min(img.width, img.height);
    const double scale = static_cast<double>(target_side) / short_side;
    require(scale <= kMaxUpscaleFactor, ErrorKind::Config,
            "upscale factor " + std::to_string(scale) + " exceeds policy limit");

    int new_w, new_h;
    if (img.width <= img.height) {
        new_w = target_side;
        new_h = std::max(target_side, static_cast<int>(std::lround(img.height * scale)));
    } else {
        new_h = target_side;
        new_w = std::max(target_side, static_cast<int>(std::lround(img.width * scale)));
    }

    RgbImage16 resized;
    if (new_w == img.width && new_h == img.height) {
        resized = img;  // scale factor 1: bit-identical passthrough
    } else {
        resized = RgbImage16::allocate(new_w, new_h, img.white_level);
        const auto xt = detail::make_taps(img.width, new_w, kernel);
        const auto yt = detail::make_taps(img.height, new_h, kernel);
        std::vector<double> plane(img.pixel_count()), mid, done;
        for (int c = 0; c < 3; ++c) {
            const auto& sp = img.plane(c);
            for (size_t i = 0; i < sp.size(); ++i) plane[i] = sp[i];
            detail::resample_rows(plane, img.width, img.height, xt, mid, new_w);
            detail::resample_cols(mid, new_w, img.height, yt, done, new_h);
            auto& dp = resized.plane(c);
            for (size_t i = 0; i < dp.size(); ++i) {
                dp[i] = detail::clamp_to_u16(done[i], img.white_level);
            }
        }
    }

    // center crop
    const int ox = (resized.width - target_side) / 2;
    const int oy = (resized.height - target_side) / 2;
    RgbImage16 out = RgbImage16::allocate(target_side, target_side, img.white_level);
    for (int c = 0; c < 3; ++c) {
        const auto& sp = resized.plane(c);
        auto& dp = out.plane(c);
        for (int y = 0; y < target_side; ++y) {
            const size_t src_off = static_cast<size_t>(y + oy) * resized.width + ox;
            std::copy_n(sp.begin() + static_cast<long>(src_off), target_side,
                        dp.begin() + static_cast<size_t>(y) * target_side);
        }
    }
    return out;
}

namespace detail {

inline void gaussian_blur_plane(const std::vector<double>& src, int w, int h, double sigma,
                                std::vector<double>& dst) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<size_t>(2 * r + 1));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<size_t>(i + r)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[static_cast<size_t>(i + r)];
    }
    for (double& v : k) v /= sum;

    std::vector<double> tmp(src.size());
    for (int y = 0; y < h; ++y) {
        const double* srow = src.data() + static_cast<size_t>(y) * w;
        double* trow = tmp.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                acc += k[static_cast<size_t>(i + r)] * srow[std::clamp(x + i, 0, w - 1)];
            }
            trow[x] = acc;
        }
    }
    dst.assign(src.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        double* drow = dst.data() + static_cast<size_t>(y) * w;
        for (int i = -r; i <= r; ++i) {
            const int sy = std::clamp(y + i, 0, h - 1);
            const double* trow = tmp.data() + static_cast<size_t>(sy) * w;
            const double wgt = k[static_cast<size_t>(i + r)];
            for (int x = 0; x < w; ++x) drow[x] += wgt * trow[x];
        }
    }
}

}  // namespace detail

/// Classic unsharp mask: out = in + amount * (in - blur(in)). amount 0 is
/// the identity by contract.
inline RgbImage16 unsharp_mask(const RgbImage16& img, double amount, double radius = kUsmRadius) {
    require(amount >= 0.0, ErrorKind::Argument, "usm amount must be >= 0");
    require(radius > 0.0, ErrorKind::Argument, "usm radius must be > 0");
    if (amount == 0.0) return img;

    RgbImage16 out = img;
    std::vector<double> plane(img.pixel_count()), blur;
    for (int c = 0; c < 3; ++c) {
        const auto& sp = img.plane(c);
        for (size_t i = 0; i < sp.size(); ++i) plane[i] = sp[i];
        detail::gaussian_blur_plane(plane, img.width, img.height, radius, blur);
        auto& dp = out.plane(c);
        for (size_t i = 0; i < dp.size(); ++i) {
            dp[i] = detail::clamp_to_u16(plane[i] + amount * (plane[i] - blur[i]), img.white_level);
        }
    }
    return out;
}

/// Multilevel wavelet shrinkage. The soft threshold grows with intensity
/// (scaled by a per-level MAD noise estimate); detail blends thresholded
/// coefficients back toward the originals, so detail 40 restores the input.
inline RgbImage16 pyramid_denoise(const RgbImage16& img, double intensity, int detail_level) {
    require(intensity >= 0.0 && intensity <= 60.0, ErrorKind::Argument,
            "denoise intensity outside [0,60]");
    require(detail_level >= 0 && detail_level <= 40, ErrorKind::Argument,
            "denoise detail outside {0..40}");
    if (intensity == 0.0 || detail_level == 40) return img;

    const int w = img.width, h = img.height;
    const auto plan = wavelet::plan_levels(w, h, 4);
    if (plan.empty()) return img;

    const double blend = detail_level / 40.0;  // weight of the untouched coefficient
    RgbImage16 out = img;

    std::vector<int32_t> plane(img.pixel_count());
    std::vector<int32_t> mags;
    for (int c = 0; c < 3; ++c) {
        const auto& sp = img.plane(c);
        for (size_t i = 0; i < sp.size(); ++i) plane[i] = sp[i];
        wavelet::forward(plane.data(), w, plan);

        for (const wavelet::LevelDims& d : plan) {
            // noise estimate from this level's diagonal band
            mags.clear();
            for (int y = d.lh; y < d.h; ++y) {
                for (int x = d.lw; x < d.w; ++x) {
                    mags.push_back(std::abs(plane[static_cast<size_t>(y) * w + x]));
                }
            }
            if (mags.empty()) continue;
            auto mid = mags.begin() + static_cast<long>(mags.size() / 2);
            std::nth_element(mags.begin(), mid, mags.end());
            const double sigma = static_cast<double>(*mid) / 0.6745;
            const double threshold = intensity * sigma / 10.0;
            if (threshold <= 0.0) continue;

            auto shrink = [&](int y0, int y1, int x0, int x1) {
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        int32_t& v = plane[static_cast<size_t>(y) * w + x];
                        const double a = std::abs(static_cast<double>(v));
                        const double soft = a <= threshold ? 0.0 : (v < 0 ? -(a - threshold) : a - threshold);
                        v = static_cast<int32_t>(std::llround((1.0 - blend) * soft + blend * v));
                    }
                }
            };
            shrink(0, d.lh, d.lw, d.w);      // HL
            shrink(d.lh, d.h, 0, d.lw);      // LH
            shrink(d.lh, d.h, d.lw, d.w);    // HH
        }

        wavelet::inverse(plane.data(), w, plan);
        auto& dp = out.plane(c);
        for (size_t i = 0; i < dp.size(); ++i) {
            dp[i] = static_cast<uint16_t>(
                std::clamp<int32_t>(plane[i], 0, img.white_level));
        }
    }
    return out;
}

/// Local contrast boost: adds a gained high-pass residual wherever the
/// residual magnitude clears a uniformity-derived threshold.
inline RgbImage16 micro_contrast(const RgbImage16& img, double strength, int uniformity) {
    require(strength >= 0.0 && strength <= 100.0, ErrorKind::Argument,
            "micro-contrast strength outside [0,100]");
    require(uniformity >= 0, ErrorKind::Argument, "uniformity must be >= 0");
    if (strength == 0.0) return img;

    const int w = img.width, h = img.height;
    const double gain = strength / 50.0;
    const double threshold = uniformity * static_cast<double>(img.white_level) / 8192.0;

    RgbImage16 out = img;
    std::vector<int32_t> row_sum(img.pixel_count());
    for (int c = 0; c < 3; ++c) {
        const auto& sp = img.plane(c);
        // separable 3x3 box sum with clamped edges
        for (int y = 0; y < h; ++y) {
            const uint16_t* srow = sp.data() + static_cast<size_t>(y) * w;
            int32_t* drow = row_sum.data() + static_cast<size_t>(y) * w;
            drow[0] = 2 * srow[0] + srow[std::min(1, w - 1)];
            for (int x = 1; x < w - 1; ++x) drow[x] = srow[x - 1] + srow[x] + srow[x + 1];
            if (w > 1) drow[w - 1] = srow[w - 2] + 2 * srow[w - 1];
        }
        auto& dp = out.plane(c);
        for (int y = 0; y < h; ++y) {
            const int32_t* above = row_sum.data() + static_cast<size_t>(std::max(y - 1, 0)) * w;
            const int32_t* here = row_sum.data() + static_cast<size_t>(y) * w;
            const int32_t* below = row_sum.data() + static_cast<size_t>(std::min(y + 1, h - 1)) * w;
            const uint16_t* srow = sp.data() + static_cast<size_t>(y) * w;
            uint16_t* drow = dp.data() + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                const double mean = (above[x] + here[x] + below[x]) / 9.0;
                const double hp = static_cast<double>(srow[x]) - mean;
                const double mag = std::fabs(hp) - threshold;
                const double boost = mag <= 0.0 ? 0.0 : (hp < 0 ? -mag : mag);
                drow[x] = detail::clamp_to_u16(srow[x] + gain * boost, img.white_level);
            }
        }
    }
    return out;
}

/// Linear 16-to-8-bit quantization against the image's white level.
inline RgbImage8 quantize_to_8bit(const RgbImage16& img) {
    require(img.white_level >= 1, ErrorKind::Argument, "white level must be >= 1");
    RgbImage8 out = RgbImage8::allocate(img.width, img.height);
    const double scale = 255.0 / img.white_level;
    std::vector<uint8_t> lut(static_cast<size_t>(img.white_level) + 1);
    for (size_t v = 0; v < lut.size(); ++v) {
        lut[v] = detail::round_to_u8(static_cast<double>(v) * scale);
    }
    const size_t top = lut.size() - 1;
    for (int c = 0; c < 3; ++c) {
        const auto& sp = img.plane(c);
        auto& dp = out.plane(c);
        for (size_t i = 0; i < sp.size(); ++i) dp[i] = lut[std::min<size_t>(sp[i], top)];
    }
    return out;
}

/// Luminance conversion, rounded half away from zero and clamped.
inline GreyImage8 to_grey(const RgbImage8& img) {
    GreyImage8 out = GreyImage8::allocate(img.width, img.height);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        const double v = 0.2989 * img.r[i] + 0.5870 * img.g[i] + 0.1140 * img.b[i];
        out.pixels[i] = detail::round_to_u8(v);
    }
    return out;
}

/// 16 disjoint 256x256 tiles of a 1024x1024 parent, row-major:
/// tile k covers rows [256*(k/4), ...) and columns [256*(k%4), ...).
template <typename ImageT>
struct TileSet {
    std::string parent_id;
    std::vector<ImageT> tiles;
};

using GreyTileSet = TileSet<GreyImage8>;
using ColourTileSet = TileSet<RgbImage8>;

inline constexpr int kTileSide = 256;
inline constexpr int kTileGrid = 4;
inline constexpr int kTileCount = kTileGrid * kTileGrid;

namespace detail {

template <typename ImageT>
ImageT crop_tile(const ImageT& img, int row0, int col0, int side);

template <>
inline GreyImage8 crop_tile(const GreyImage8& img, int row0, int col0, int side) {
    GreyImage8 t = GreyImage8::allocate(side, side);
    for (int y = 0; y < side; ++y) {
        std::copy_n(img.pixels.begin() + static_cast<size_t>(row0 + y) * img.width + col0, side,
                    t.pixels.begin() + static_cast<size_t>(y) * side);
    }
    return t;
}

template <>
inline RgbImage8 crop_tile(const RgbImage8& img, int row0, int col0, int side) {
    RgbImage8 t = RgbImage8::allocate(side, side);
    for (int c = 0; c < 3; ++c) {
        const auto& sp = img.plane(c);
        auto& dp = t.plane(c);
        for (int y = 0; y < side; ++y) {
            std::copy_n(sp.begin() + static_cast<size_t>(row0 + y) * img.width + col0, side,
                        dp.begin() + static_cast<size_t>(y) * side);
        }
    }
    return t;
}

}  // namespace detail

template <typename ImageT>
TileSet<ImageT> tile16(const ImageT& img, std::string parent_id = {}) {
    require(img.width == kTileGrid * kTileSide && img.height == kTileGrid * kTileSide,
            ErrorKind::Invariant,
            "tiling requires a 1024x1024 image, got " + std::to_string(img.width) + "x" +
                std::to_string(img.height));
    TileSet<ImageT> set;
    set.parent_id = std::move(parent_id);
    set.tiles.reserve(kTileCount);
    for (int k = 0; k < kTileCount; ++k) {
        const int row0 = kTileSide * (k / kTileGrid);
        const int col0 = kTileSide * (k % kTileGrid);
        set.tiles.push_back(detail::crop_tile(img, row0, col0, kTileSide));
    }
    return set;
}

template <typename ImageT>
ImageT reassemble(const TileSet<ImageT>& set) {
    require(set.tiles.size() == kTileCount, ErrorKind::Invariant, "tile set must hold 16 tiles");
    ImageT out = ImageT::allocate(kTileGrid * kTileSide, kTileGrid * kTileSide);
    for (int k = 0; k < kTileCount; ++k) {
        const ImageT& t = set.tiles[static_cast<size_t>(k)];
        require(t.width == kTileSide && t.height == kTileSide, ErrorKind::Invariant,
                "tile must be 256x256");
        const int row0 = kTileSide * (k / kTileGrid);
        const int col0 = kTileSide * (k % kTileGrid);
        if constexpr (std::is_same_v<ImageT, GreyImage8>) {
            for (int y = 0; y < kTileSide; ++y) {
                std::copy_n(t.pixels.begin() + static_cast<size_t>(y) * kTileSide, kTileSide,
                            out.pixels.begin() + static_cast<size_t>(row0 + y) * out.width + col0);
            }
        } else {
            for (int c = 0; c < 3; ++c) {
                const auto& sp = t.plane(c);
                auto& dp = out.plane(c);
                for (int y = 0; y < kTileSide; ++y) {
                    std::copy_n(sp.begin() + static_cast<size_t>(y) * kTileSide, kTileSide,
                                dp.begin() + static_cast<size_t>(row0 + y) * out.width + col0);
                }
            }
        }
    }
    return out;
}

struct DevelopResult {
    RgbImage8 colour;       // developed 1024x1024 colour image
    GreyImage8 grey;        // its luminance version
    ColourTileSet colour_tiles;
    GreyTileSet grey_tiles;
    bool upscaled = false;  // source short side was below the target
};

/// Runs the full chain for one image. Deterministic in (cfa, recipe); stage
/// failures are rethrown with the stage named.
inline DevelopResult develop_image(const CfaImage& cfa, const DevRecipe& recipe,
                                   const std::string& image_id = {}) {
    recipe.validate();
    auto stage = [&](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("stage ") + name + " for '" + image_id + "': " +
                                      e.what());
        }
    };

    DevelopResult result;
    result.upscaled = std::min(cfa.width, cfa.height) < recipe.target_side;

    RgbImage16 rgb = stage("demosaic", [&] { return demosaic(cfa, recipe.demosaic); });
    rgb = stage("resize", [&] { return resize_crop(rgb, recipe.resize_kernel, recipe.target_side); });
    if (recipe.usm_enabled) {
        rgb = stage("usm", [&] { return unsharp_mask(rgb, recipe.usm_amount); });
    } else {
        rgb = stage("denoise",
                    [&] { return pyramid_denoise(rgb, recipe.denoise_intensity, recipe.denoise_detail); });
    }
    if (recipe.microcontrast_enabled) {
        rgb = stage("microcontrast",
                    [&] { return micro_contrast(rgb, recipe.mc_strength, recipe.mc_uniformity); });
    }

    result.colour = quantize_to_8bit(rgb);
    result.grey = to_grey(result.colour);
    result.colour_tiles = tile16(result.colour, image_id);
    result.grey_tiles = tile16(result.grey, image_id);
    return result;
}

}  // namespace lssd
