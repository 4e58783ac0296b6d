#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "lssd/error.hpp"

namespace lssd::jpeg {

/// 8x8 quantization table in natural (row-major) order.
struct QuantMatrix {
    std::array<uint16_t, 64> values{};

    uint16_t at(int row, int col) const { return values[static_cast<size_t>(row) * 8 + col]; }
    uint16_t& at(int row, int col) { return values[static_cast<size_t>(row) * 8 + col]; }

    bool operator==(const QuantMatrix&) const = default;

    /// Tables used for encoding must fit 8-bit DQT precision and never be 0.
    void validate_for_encoding() const {
        for (uint16_t v : values) {
            require(v >= 1 && v <= 255, ErrorKind::Argument,
                    "quantization entry " + std::to_string(v) + " outside [1,255]");
        }
    }
};

enum class TableKind { Luminance, Chrominance };

/// Base tables for quality 50 (the JPEG standard's example tables).
inline const QuantMatrix& base_table(TableKind kind) {
    static const QuantMatrix luma = {{
        16, 11, 10, 16, 24, 40, 51, 61,
        12, 12, 14, 19, 26, 58, 60, 55,
        14, 13, 16, 24, 40, 57, 69, 56,
        14, 17, 22, 29, 51, 87, 80, 62,
        18, 22, 37, 56, 68, 109, 103, 77,
        24, 35, 55, 64, 81, 104, 113, 92,
        49, 64, 78, 87, 103, 121, 120, 101,
        72, 92, 95, 98, 112, 100, 103, 99,
    }};
    static const QuantMatrix chroma = {{
        17, 18, 24, 47, 99, 99, 99, 99,
        18, 21, 26, 66, 99, 99, 99, 99,
        24, 26, 56, 99, 99, 99, 99, 99,
        47, 66, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99,
    }};
    return kind == TableKind::Luminance ? luma : chroma;
}

namespace detail {
inline int round_half_away(double x) {
    return static_cast<int>(x < 0 ? std::ceil(x - 0.5) : std::floor(x + 0.5));
}
}  // namespace detail

/// Standard quantization matrix for a quality factor:
///   Q > 50:  max(1,   round(2(1 - Q/100) * base))
///   Q <= 50: min(255, round((50/Q) * base))
inline QuantMatrix std_quant_matrix(int quality, TableKind kind = TableKind::Luminance) {
    require(quality >= 1 && quality <= 100, ErrorKind::Argument,
            "quality factor " + std::to_string(quality) + " outside [1,100]");
    const QuantMatrix& base = base_table(kind);
    const double scale = quality > 50 ? 2.0 * (1.0 - quality / 100.0) : 50.0 / quality;
    QuantMatrix out;
    for (int i = 0; i < 64; ++i) {
        const int v = detail::round_half_away(scale * base.values[static_cast<size_t>(i)]);
        out.values[static_cast<size_t>(i)] =
            static_cast<uint16_t>(quality > 50 ? std::max(1, v) : std::min(255, v));
    }
    return out;
}

struct QfEstimate {
    int q_estimated = 0;
    bool is_standard = false;
    double distance = 0.0;
};

/// Scans all standard matrices and returns the closest quality factor under
/// mean relative L1 distance; exactly zero distance means a standard table.
/// Ties resolve toward the larger quality.
inline QfEstimate estimate_qf(const QuantMatrix& q, TableKind kind = TableKind::Luminance) {
    QfEstimate best;
    best.distance = -1.0;
    for (int quality = 1; quality <= 100; ++quality) {
        const QuantMatrix s = std_quant_matrix(quality, kind);
        double d = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double si = s.values[static_cast<size_t>(i)];
            d += std::fabs(q.values[static_cast<size_t>(i)] - si) / si;
        }
        d /= 64.0;
        if (best.distance < 0.0 || d <= best.distance) {
            best.distance = d;
            best.q_estimated = quality;
        }
    }
    best.is_standard = best.distance == 0.0;
    return best;
}

/// Re-targets a (possibly non-standard) table to another quality factor.
/// The input's estimated quality leads back to a quality-50 field via the
/// elementwise passage ratio base(50)/std(estimate); the standard formula
/// then scales that field to the target. Standard inputs therefore map to
/// std_quant_matrix(target).
inline QuantMatrix nonstandard_target(const QuantMatrix& q, int target_quality,
                                      TableKind kind = TableKind::Luminance) {
    require(target_quality >= 1 && target_quality <= 100, ErrorKind::Argument,
            "target quality outside [1,100]");
    const QfEstimate est = estimate_qf(q, kind);
    const QuantMatrix est_std = std_quant_matrix(est.q_estimated, kind);
    const QuantMatrix& base = base_table(kind);

    std::array<double, 64> field50;
    for (int i = 0; i < 64; ++i) {
        field50[static_cast<size_t>(i)] = static_cast<double>(q.values[static_cast<size_t>(i)]) *
                                          base.values[static_cast<size_t>(i)] /
                                          est_std.values[static_cast<size_t>(i)];
    }

    const double scale = target_quality > 50 ? 2.0 * (1.0 - target_quality / 100.0)
                                             : 50.0 / target_quality;
    QuantMatrix out;
    for (int i = 0; i < 64; ++i) {
        const int v = detail::round_half_away(scale * field50[static_cast<size_t>(i)]);
        // non-standard fields can land outside [1,255] on either branch
        out.values[static_cast<size_t>(i)] = static_cast<uint16_t>(std::clamp(v, 1, 255));
    }
    return out;
}

}  // namespace lssd::jpeg
