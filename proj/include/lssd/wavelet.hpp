#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lssd/error.hpp"

namespace lssd::wavelet {

// Reversible 5/3 lifting transform (LeGall) on int32 planes, symmetric
// boundary extension. Integer lifting makes forward+inverse exact, so an
// untouched pyramid reconstructs the input bit-for-bit.

namespace detail {

// Forward lift of one contiguous line; out = [approx ceil(n/2) | detail
// floor(n/2)]. `d` is caller-provided scratch of at least n/2 entries.
inline void lift_line(const int32_t* x, int n, int32_t* out, int32_t* d) {
    const int nd = n / 2;
    const int ns = n - nd;
    for (int i = 0; i < nd; ++i) {
        const int32_t left = x[2 * i];
        const int32_t right = (2 * i + 2 <= n - 1) ? x[2 * i + 2] : x[2 * i];  // mirror
        d[i] = x[2 * i + 1] - ((left + right) >> 1);
    }
    for (int i = 0; i < ns; ++i) {
        int32_t dl = 0, dr = 0;
        if (nd > 0) {
            dl = d[i - 1 >= 0 ? i - 1 : 0];
            dr = d[i < nd ? i : nd - 1];
        }
        out[i] = x[2 * i] + ((dl + dr + 2) >> 2);
    }
    for (int i = 0; i < nd; ++i) out[ns + i] = d[i];
}

// Inverse of lift_line; `even` is caller scratch of at least (n+1)/2.
inline void unlift_line(const int32_t* c, int n, int32_t* out, int32_t* even) {
    const int nd = n / 2;
    const int ns = n - nd;
    const int32_t* s = c;
    const int32_t* d = c + ns;
    for (int i = 0; i < ns; ++i) {
        int32_t dl = 0, dr = 0;
        if (nd > 0) {
            dl = d[i - 1 >= 0 ? i - 1 : 0];
            dr = d[i < nd ? i : nd - 1];
        }
        even[i] = s[i] - ((dl + dr + 2) >> 2);
    }
    for (int i = 0; i < ns; ++i) out[2 * i] = even[i];
    for (int i = 0; i < nd; ++i) {
        const int32_t left = even[i];
        const int32_t right = (i + 1 < ns) ? even[i + 1] : even[i];
        out[2 * i + 1] = d[i] + ((left + right) >> 1);
    }
}

struct Scratch {
    std::vector<int32_t> line, d;
    std::vector<int32_t> region;  // vertical pass staging, one (w x h) block
    void ensure(int w, int h) {
        const size_t n = static_cast<size_t>(std::max(w, h));
        if (line.size() < n) {
            line.resize(n);
            d.resize(n);
        }
        if (region.size() < static_cast<size_t>(w) * h) {
            region.resize(static_cast<size_t>(w) * h);
        }
    }
};

}  // namespace detail

/// In-place one-level 2-D transform of the top-left (w x h) region of a
/// plane with the given row pitch. Rows first, then columns; the vertical
/// pass runs row-at-a-time so memory access stays sequential.
inline void forward_level(int32_t* plane, int w, int h, int pitch,
                          detail::Scratch& scratch) {
    scratch.ensure(w, h);
    for (int y = 0; y < h; ++y) {
        int32_t* row = plane + static_cast<size_t>(y) * pitch;
        detail::lift_line(row, w, scratch.line.data(), scratch.d.data());
        std::copy_n(scratch.line.data(), w, row);
    }

    const int nd = h / 2;
    const int ns = h - nd;
    auto src = [&](int y) { return plane + static_cast<size_t>(y) * pitch; };
    int32_t* detail_rows = scratch.region.data();  // nd rows of w
    for (int i = 0; i < nd; ++i) {
        const int32_t* odd = src(2 * i + 1);
        const int32_t* up = src(2 * i);
        const int32_t* down = src(2 * i + 2 <= h - 1 ? 2 * i + 2 : 2 * i);
        int32_t* out = detail_rows + static_cast<size_t>(i) * w;
        for (int x = 0; x < w; ++x) out[x] = odd[x] - ((up[x] + down[x]) >> 1);
    }
    // approx rows update in place (even rows are only read once each)
    for (int i = 0; i < ns; ++i) {
        const int32_t* dl = detail_rows + static_cast<size_t>(nd > 0 ? std::max(i - 1, 0) : 0) * w;
        const int32_t* dr = detail_rows + static_cast<size_t>(nd > 0 ? std::min(i, nd - 1) : 0) * w;
        int32_t* even = src(2 * i);
        if (nd > 0) {
            for (int x = 0; x < w; ++x) even[x] += (dl[x] + dr[x] + 2) >> 2;
        }
    }
    // compact: approx rows to the top, detail rows below
    for (int i = 0; i < ns; ++i) {
        if (2 * i != i) std::copy_n(src(2 * i), w, src(i));
    }
    for (int i = 0; i < nd; ++i) {
        std::copy_n(detail_rows + static_cast<size_t>(i) * w, w, src(ns + i));
    }
}

inline void inverse_level(int32_t* plane, int w, int h, int pitch,
                          detail::Scratch& scratch) {
    scratch.ensure(w, h);
    const int nd = h / 2;
    const int ns = h - nd;
    auto src = [&](int y) { return plane + static_cast<size_t>(y) * pitch; };

    // stage both halves so the interleaved write-back cannot clobber inputs
    int32_t* even_rows = scratch.region.data();                             // ns rows
    int32_t* detail_rows = scratch.region.data() + static_cast<size_t>(ns) * w;  // nd rows
    for (int i = 0; i < ns; ++i) {
        const int32_t* s = src(i);
        int32_t* out = even_rows + static_cast<size_t>(i) * w;
        if (nd > 0) {
            const int32_t* dl = src(ns + std::max(i - 1, 0));
            const int32_t* dr = src(ns + std::min(i, nd - 1));
            for (int x = 0; x < w; ++x) out[x] = s[x] - ((dl[x] + dr[x] + 2) >> 2);
        } else {
            std::copy_n(s, w, out);
        }
    }
    for (int i = 0; i < nd; ++i) {
        std::copy_n(src(ns + i), w, detail_rows + static_cast<size_t>(i) * w);
    }
    for (int i = 0; i < ns; ++i) {
        std::copy_n(even_rows + static_cast<size_t>(i) * w, w, src(2 * i));
    }
    for (int i = 0; i < nd; ++i) {
        const int32_t* d = detail_rows + static_cast<size_t>(i) * w;
        const int32_t* up = even_rows + static_cast<size_t>(i) * w;
        const int32_t* down = even_rows + static_cast<size_t>(i + 1 < ns ? i + 1 : i) * w;
        int32_t* out = src(2 * i + 1);
        for (int x = 0; x < w; ++x) out[x] = d[x] + ((up[x] + down[x]) >> 1);
    }

    for (int y = 0; y < h; ++y) {
        int32_t* row = plane + static_cast<size_t>(y) * pitch;
        std::copy_n(row, w, scratch.line.data());
        detail::unlift_line(scratch.line.data(), w, row, scratch.d.data());
    }
}

struct LevelDims {
    int w = 0, h = 0;    // region transformed at this level
    int lw = 0, lh = 0;  // its approx (low-low) quadrant
};

/// Level geometry for a multilevel transform; stops early when a region
/// gets too small to split meaningfully.
inline std::vector<LevelDims> plan_levels(int w, int h, int max_levels) {
    std::vector<LevelDims> plan;
    int cw = w, ch = h;
    for (int l = 0; l < max_levels && cw >= 8 && ch >= 8; ++l) {
        LevelDims d;
        d.w = cw;
        d.h = ch;
        d.lw = (cw + 1) / 2;
        d.lh = (ch + 1) / 2;
        plan.push_back(d);
        cw = d.lw;
        ch = d.lh;
    }
    return plan;
}

inline void forward(int32_t* plane, int w, const std::vector<LevelDims>& plan) {
    detail::Scratch scratch;
    for (const LevelDims& d : plan) forward_level(plane, d.w, d.h, w, scratch);
}

inline void inverse(int32_t* plane, int w, const std::vector<LevelDims>& plan) {
    detail::Scratch scratch;
    for (auto it = plan.rbegin(); it != plan.rend(); ++it) {
        inverse_level(plane, it->w, it->h, w, scratch);
    }
}

}  // namespace lssd::wavelet
