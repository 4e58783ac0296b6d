#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lssd/error.hpp"
#include "lssd/image.hpp"
#include "lssd/jpeg.hpp"

namespace lssd::jpeg {

// Baseline sequential JFIF codec: 8-bit precision, 4:4:4 colour (no chroma
// subsampling), fixed example Huffman tables so identical input bytes always
// produce identical output bytes. The decoder's inverse DCT reproduces the
// widespread libjpeg "slow" integer algorithm bit-for-bit, so emitted
// streams decode identically here and in stock libjpeg-based tools.

using Bytes = std::vector<uint8_t>;

inline constexpr std::array<uint8_t, 64> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};

struct HuffSpec {
    std::array<uint8_t, 16> bits{};  // code count per length 1..16
    std::vector<uint8_t> vals;
};

inline const HuffSpec& std_huff_dc_luma() {
    static const HuffSpec spec = {
        {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return spec;
}

inline const HuffSpec& std_huff_dc_chroma() {
    static const HuffSpec spec = {
        {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return spec;
}

inline const HuffSpec& std_huff_ac_luma() {
    static const HuffSpec spec = {
        {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51,
         0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1,
         0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
         0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
         0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57,
         0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
         0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92,
         0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
         0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
         0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8,
         0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return spec;
}

inline const HuffSpec& std_huff_ac_chroma() {
    static const HuffSpec spec = {
        {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07,
         0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09,
         0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25,
         0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
         0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56,
         0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
         0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
         0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
         0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba,
         0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6,
         0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return spec;
}

// ---------------------------------------------------------------------------
// Parsed structure

struct FrameComponent {
    int id = 0;
    int h = 1, v = 1;
    int tq = 0;  // quant table selector
};

struct HuffTable {
    int table_class = 0;  // 0 = DC, 1 = AC
    int table_id = 0;
    HuffSpec spec;
};

struct MarkerInfo {
    uint8_t code = 0;
    size_t offset = 0;  // offset of the 0xFF byte
    size_t length = 0;  // segment length field, 0 for bare markers
};

/// Marker-level view of one baseline stream.
struct JpegStructure {
    int width = 0, height = 0, precision = 8;
    std::vector<FrameComponent> components;
    std::array<std::optional<QuantMatrix>, 4> quant_tables;  // by table id
    std::vector<HuffTable> huffman_tables;
    int restart_interval = 0;
    size_t scan_offset = 0, scan_length = 0;
    std::vector<MarkerInfo> markers;

    const QuantMatrix& quant_for_component(size_t index) const {
        require(index < components.size(), ErrorKind::Argument, "component index out of range");
        const int tq = components[index].tq;
        require(tq >= 0 && tq < 4 && quant_tables[static_cast<size_t>(tq)].has_value(),
                ErrorKind::Format, "frame references missing quantization table");
        return *quant_tables[static_cast<size_t>(tq)];
    }
};

// ---------------------------------------------------------------------------
// Bit-level helpers

namespace detail {

class BitWriter {
public:
    explicit BitWriter(Bytes& out) : out_(out) {}

    void put(uint32_t code, int length) {
        acc_ = (acc_ << length) | (code & ((1u << length) - 1));
        count_ += length;
        while (count_ >= 8) {
            const uint8_t byte = static_cast<uint8_t>((acc_ >> (count_ - 8)) & 0xFF);
            out_.push_back(byte);
            if (byte == 0xFF) out_.push_back(0x00);
            count_ -= 8;
        }
    }

    void flush() {
        if (count_ > 0) {
            const int pad = 8 - count_;
            put((1u << pad) - 1, pad);  // pad with 1 bits to the byte edge
        }
    }

private:
    Bytes& out_;
    uint64_t acc_ = 0;
    int count_ = 0;
};

struct HuffEncoder {
    std::array<uint16_t, 256> code{};
    std::array<uint8_t, 256> size{};

    explicit HuffEncoder(const HuffSpec& spec) {
        uint16_t next = 0;
        size_t k = 0;
        for (int len = 1; len <= 16; ++len) {
            for (int i = 0; i < spec.bits[static_cast<size_t>(len - 1)]; ++i) {
                const uint8_t symbol = spec.vals[k++];
                code[symbol] = next;
                size[symbol] = static_cast<uint8_t>(len);
                ++next;
            }
            next = static_cast<uint16_t>(next << 1);
        }
    }

    void emit(BitWriter& bw, uint8_t symbol) const {
        require(size[symbol] != 0, ErrorKind::Argument, "symbol not in huffman table");
        bw.put(code[symbol], size[symbol]);
    }
};

inline int bit_category(int32_t v) {
    uint32_t m = static_cast<uint32_t>(v < 0 ? -v : v);
    int n = 0;
    while (m != 0) {
        m >>= 1;
        ++n;
    }
    return n;
}

// Huffman decoding tables per T.81 F.2.2.3
struct HuffDecoder {
    std::array<int32_t, 17> mincode{};
    std::array<int32_t, 17> maxcode{};
    std::array<int32_t, 17> valptr{};
    std::vector<uint8_t> vals;

    explicit HuffDecoder(const HuffSpec& spec) : vals(spec.vals) {
        int32_t code = 0;
        int32_t k = 0;
        for (int len = 1; len <= 16; ++len) {
            if (spec.bits[static_cast<size_t>(len - 1)] == 0) {
                maxcode[static_cast<size_t>(len)] = -1;
            } else {
                valptr[static_cast<size_t>(len)] = k;
                mincode[static_cast<size_t>(len)] = code;
                k += spec.bits[static_cast<size_t>(len - 1)];
                code += spec.bits[static_cast<size_t>(len - 1)];
                maxcode[static_cast<size_t>(len)] = code - 1;
            }
            code <<= 1;
        }
    }
};

class BitReader {
public:
    BitReader(std::span<const uint8_t> data, size_t start) : data_(data), pos_(start) {}

    int next_bit() {
        if (count_ == 0) {
            fetch_byte();
        }
        --count_;
        return (acc_ >> count_) & 1;
    }

    int receive(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | next_bit();
        return v;
    }

    /// Byte-aligns and consumes an expected restart marker.
    void sync_restart(int expected_index) {
        count_ = 0;
        require(pos_ + 1 < data_.size(), ErrorKind::Truncated, "scan ended before restart marker");
        require(data_[pos_] == 0xFF, ErrorKind::Corrupt, "expected restart marker");
        const uint8_t code = data_[pos_ + 1];
        require(code == 0xD0 + expected_index, ErrorKind::Corrupt, "restart marker out of sequence");
        pos_ += 2;
    }

    /// Position of the next unread byte (after aligning).
    size_t byte_pos() const { return pos_; }

private:
    void fetch_byte() {
        require(pos_ < data_.size(), ErrorKind::Truncated, "entropy data ended early");
        uint8_t b = data_[pos_++];
        if (b == 0xFF) {
            require(pos_ < data_.size(), ErrorKind::Truncated, "entropy data ended at 0xFF");
            const uint8_t b2 = data_[pos_];
            if (b2 == 0x00) {
                ++pos_;  // stuffed byte
            } else if (b2 == 0xD9) {
                fail(ErrorKind::Truncated, "entropy data ran into EOI");
            } else {
                fail(ErrorKind::Corrupt, "unexpected marker inside entropy data");
            }
        }
        acc_ = b;
        count_ = 8;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    uint32_t acc_ = 0;
    int count_ = 0;
};

inline int32_t extend_receive(BitReader& br, int category) {
    if (category == 0) return 0;
    const int v = br.receive(category);
    return v < (1 << (category - 1)) ? v - (1 << category) + 1 : v;
}

inline int decode_symbol(BitReader& br, const HuffDecoder& table) {
    int32_t code = br.next_bit();
    int len = 1;
    while (code > table.maxcode[static_cast<size_t>(len)]) {
        code = (code << 1) | br.next_bit();
        ++len;
        require(len <= 16, ErrorKind::Corrupt, "invalid huffman code");
    }
    const int32_t idx = table.valptr[static_cast<size_t>(len)] +
                        (code - table.mincode[static_cast<size_t>(len)]);
    require(idx >= 0 && idx < static_cast<int32_t>(table.vals.size()), ErrorKind::Corrupt,
            "huffman code indexes outside value list");
    return table.vals[static_cast<size_t>(idx)];
}

// Forward DCT: AAN factorization in double precision. The 1-D passes leave
// the coefficients scaled by 8 * s(u) * s(v); the quantizer divisors absorb
// that, so the rounded result equals dividing the true DCT by the table.
struct QuantDivisors {
    std::array<double, 64> div{};

    explicit QuantDivisors(const QuantMatrix& quant) {
        static const double aan[8] = {1.0,         1.387039845, 1.306562965, 1.175875602,
                                      1.0,         0.785694958, 0.541196100, 0.275899379};
        for (int v = 0; v < 8; ++v) {
            for (int u = 0; u < 8; ++u) {
                div[static_cast<size_t>(v * 8 + u)] =
                    quant.values[static_cast<size_t>(v * 8 + u)] * aan[v] * aan[u] * 8.0;
            }
        }
    }
};

inline void fdct_1d(double* d) {
    const double tmp0 = d[0] + d[7], tmp7 = d[0] - d[7];
    const double tmp1 = d[1] + d[6], tmp6 = d[1] - d[6];
    const double tmp2 = d[2] + d[5], tmp5 = d[2] - d[5];
    const double tmp3 = d[3] + d[4], tmp4 = d[3] - d[4];

    double tmp10 = tmp0 + tmp3;
    const double tmp13 = tmp0 - tmp3;
    double tmp11 = tmp1 + tmp2;
    double tmp12 = tmp1 - tmp2;

    d[0] = tmp10 + tmp11;
    d[4] = tmp10 - tmp11;
    const double z1 = (tmp12 + tmp13) * 0.707106781;
    d[2] = tmp13 + z1;
    d[6] = tmp13 - z1;

    tmp10 = tmp4 + tmp5;
    tmp11 = tmp5 + tmp6;
    tmp12 = tmp6 + tmp7;
    const double z5 = (tmp10 - tmp12) * 0.382683433;
    const double z2 = 0.541196100 * tmp10 + z5;
    const double z4 = 1.306562965 * tmp12 + z5;
    const double z3 = tmp11 * 0.707106781;
    const double z11 = tmp7 + z3;
    const double z13 = tmp7 - z3;
    d[5] = z13 + z2;
    d[3] = z13 - z2;
    d[1] = z11 + z4;
    d[7] = z11 - z4;
}

/// Level-shifted samples -> quantized coefficients, rounding half away
/// from zero at the quantizer.
inline void fdct_quantize(const double* samples, const QuantDivisors& divisors, int32_t* coef) {
    double block[64];
    for (int i = 0; i < 64; ++i) block[i] = samples[i];
    for (int row = 0; row < 8; ++row) fdct_1d(block + row * 8);
    double col[8];
    for (int c = 0; c < 8; ++c) {
        for (int i = 0; i < 8; ++i) col[i] = block[i * 8 + c];
        fdct_1d(col);
        for (int i = 0; i < 8; ++i) block[i * 8 + c] = col[i];
    }
    for (int i = 0; i < 64; ++i) {
        const double scaled = block[i] / divisors.div[static_cast<size_t>(i)];
        coef[i] = scaled < 0 ? -static_cast<int32_t>(std::floor(-scaled + 0.5))
                             : static_cast<int32_t>(std::floor(scaled + 0.5));
    }
}

// Inverse DCT, fixed-point "slow" integer algorithm. out_int receives the
// descaled integer result (before +128 level shift); out_real, when given,
// receives the same accumulator without the final rounding, so
// round_half_up(out_real) == out_int by construction.
inline void idct_islow(const int32_t* coef, const uint16_t* quant, int32_t* out_int,
                       double* out_real) {
    constexpr int kConstBits = 13;
    constexpr int kPass1Bits = 2;
    constexpr int64_t kFix_0_298631336 = 2446;
    constexpr int64_t kFix_0_390180644 = 3196;
    constexpr int64_t kFix_0_541196100 = 4433;
    constexpr int64_t kFix_0_765366865 = 6270;
    constexpr int64_t kFix_0_899976223 = 7373;
    constexpr int64_t kFix_1_175875602 = 9633;
    constexpr int64_t kFix_1_501321110 = 12299;
    constexpr int64_t kFix_1_847759065 = 15137;
    constexpr int64_t kFix_1_961570560 = 16069;
    constexpr int64_t kFix_2_053119869 = 16819;
    constexpr int64_t kFix_2_562915447 = 20995;
    constexpr int64_t kFix_3_072711026 = 25172;

    auto descale = [](int64_t x, int n) { return (x + (int64_t{1} << (n - 1))) >> n; };

    int64_t ws[64];

    for (int c = 0; c < 8; ++c) {
        auto deq = [&](int row) {
            return static_cast<int64_t>(coef[row * 8 + c]) * quant[row * 8 + c];
        };
        int64_t z2 = deq(2), z3 = deq(6);
        int64_t z1 = (z2 + z3) * kFix_0_541196100;
        int64_t tmp2 = z1 - z3 * kFix_1_847759065;
        int64_t tmp3 = z1 + z2 * kFix_0_765366865;

        z2 = deq(0);
        z3 = deq(4);
        int64_t tmp0 = (z2 + z3) << kConstBits;
        int64_t tmp1 = (z2 - z3) << kConstBits;

        const int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
        const int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

        tmp0 = deq(7);
        tmp1 = deq(5);
        tmp2 = deq(3);
        tmp3 = deq(1);
        z1 = tmp0 + tmp3;
        z2 = tmp1 + tmp2;
        z3 = tmp0 + tmp2;
        int64_t z4 = tmp1 + tmp3;
        const int64_t z5 = (z3 + z4) * kFix_1_175875602;

        tmp0 *= kFix_0_298631336;
        tmp1 *= kFix_2_053119869;
        tmp2 *= kFix_3_072711026;
        tmp3 *= kFix_1_501321110;
        z1 *= -kFix_0_899976223;
        z2 *= -kFix_2_562915447;
        z3 = z3 * -kFix_1_961570560 + z5;
        z4 = z4 * -kFix_0_390180644 + z5;

        tmp0 += z1 + z3;
        tmp1 += z2 + z4;
        tmp2 += z2 + z3;
        tmp3 += z1 + z4;

        ws[8 * 0 + c] = descale(tmp10 + tmp3, kConstBits - kPass1Bits);
        ws[8 * 7 + c] = descale(tmp10 - tmp3, kConstBits - kPass1Bits);
        ws[8 * 1 + c] = descale(tmp11 + tmp2, kConstBits - kPass1Bits);
        ws[8 * 6 + c] = descale(tmp11 - tmp2, kConstBits - kPass1Bits);
        ws[8 * 2 + c] = descale(tmp12 + tmp1, kConstBits - kPass1Bits);
        ws[8 * 5 + c] = descale(tmp12 - tmp1, kConstBits - kPass1Bits);
        ws[8 * 3 + c] = descale(tmp13 + tmp0, kConstBits - kPass1Bits);
        ws[8 * 4 + c] = descale(tmp13 - tmp0, kConstBits - kPass1Bits);
    }

    constexpr int kFinalBits = kConstBits + kPass1Bits + 3;
    constexpr double kFinalScale = static_cast<double>(int64_t{1} << kFinalBits);

    for (int r = 0; r < 8; ++r) {
        const int64_t* row = ws + 8 * r;
        int64_t z2 = row[2], z3 = row[6];
        int64_t z1 = (z2 + z3) * kFix_0_541196100;
        int64_t tmp2 = z1 - z3 * kFix_1_847759065;
        int64_t tmp3 = z1 + z2 * kFix_0_765366865;

        z2 = row[0];
        z3 = row[4];
        int64_t tmp0 = (z2 + z3) << kConstBits;
        int64_t tmp1 = (z2 - z3) << kConstBits;

        const int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
        const int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

        tmp0 = row[7];
        tmp1 = row[5];
        tmp2 = row[3];
        tmp3 = row[1];
        z1 = tmp0 + tmp3;
        z2 = tmp1 + tmp2;
        z3 = tmp0 + tmp2;
        int64_t z4 = tmp1 + tmp3;
        const int64_t z5 = (z3 + z4) * kFix_1_175875602;

        tmp0 *= kFix_0_298631336;
        tmp1 *= kFix_2_053119869;
        tmp2 *= kFix_3_072711026;
        tmp3 *= kFix_1_501321110;
        z1 *= -kFix_0_899976223;
        z2 *= -kFix_2_562915447;
        z3 = z3 * -kFix_1_961570560 + z5;
        z4 = z4 * -kFix_0_390180644 + z5;

        tmp0 += z1 + z3;
        tmp1 += z2 + z4;
        tmp2 += z2 + z3;
        tmp3 += z1 + z4;

        const int64_t acc[8] = {tmp10 + tmp3, tmp11 + tmp2, tmp12 + tmp1, tmp13 + tmp0,
                                tmp13 - tmp0, tmp12 - tmp1, tmp11 - tmp2, tmp10 - tmp3};
        for (int x = 0; x < 8; ++x) {
            out_int[r * 8 + x] = static_cast<int32_t>(descale(acc[x], kFinalBits));
            if (out_real != nullptr) {
                out_real[r * 8 + x] = static_cast<double>(acc[x]) / kFinalScale + 128.0;
            }
        }
    }
}

inline uint8_t clamp_sample(int32_t v) {
    return static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

// libjpeg's fixed-point YCbCr -> RGB conversion tables
struct YccTables {
    std::array<int32_t, 256> crr{}, cbb{}, crg{}, cbg{};

    YccTables() {
        for (int i = 0; i < 256; ++i) {
            const int32_t x = i - 128;
            crr[static_cast<size_t>(i)] = (91881 * x + 32768) >> 16;
            cbb[static_cast<size_t>(i)] = (116131 * x + 32768) >> 16;
            crg[static_cast<size_t>(i)] = -46802 * x;
            cbg[static_cast<size_t>(i)] = -22554 * x + 32768;
        }
    }
};

inline const YccTables& ycc_tables() {
    static const YccTables t;
    return t;
}

inline void be16(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline void marker(Bytes& out, uint8_t code) {
    out.push_back(0xFF);
    out.push_back(code);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Coefficient-domain view

struct CoeffPlane {
    int width = 0, height = 0;      // sample dimensions
    int blocks_w = 0, blocks_h = 0;
    std::vector<std::array<int32_t, 64>> blocks;  // natural order

    std::array<int32_t, 64>& block(int by, int bx) {
        return blocks[static_cast<size_t>(by) * blocks_w + bx];
    }
    const std::array<int32_t, 64>& block(int by, int bx) const {
        return blocks[static_cast<size_t>(by) * blocks_w + bx];
    }
};

struct JpegCoefficients {
    JpegStructure structure;
    std::vector<CoeffPlane> planes;  // one per frame component
};

// ---------------------------------------------------------------------------
// Parsing and decoding

namespace detail {

class Cursor {
public:
    explicit Cursor(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() {
        require(pos_ < data_.size(), ErrorKind::Truncated, "stream ended inside a segment");
        return data_[pos_++];
    }
    uint16_t u16() {
        const uint16_t hi = u8();
        return static_cast<uint16_t>((hi << 8) | u8());
    }
    void skip(size_t n) {
        require(pos_ + n <= data_.size(), ErrorKind::Truncated, "segment length overruns stream");
        pos_ += n;
    }
    size_t pos() const { return pos_; }
    void seek(size_t p) { pos_ = p; }
    bool at_end() const { return pos_ >= data_.size(); }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

inline void parse_dqt(Cursor& cur, size_t seg_end, JpegStructure& st) {
    while (cur.pos() < seg_end) {
        const uint8_t pq_tq = cur.u8();
        const int precision = pq_tq >> 4;
        const int id = pq_tq & 0x0F;
        require(precision <= 1, ErrorKind::Format, "bad DQT precision flag");
        require(id < 4, ErrorKind::Format, "bad DQT table id");
        QuantMatrix q;
        for (int k = 0; k < 64; ++k) {
            const uint16_t v = precision == 1 ? cur.u16() : cur.u8();
            q.values[kZigzagToNatural[static_cast<size_t>(k)]] = v;
        }
        st.quant_tables[static_cast<size_t>(id)] = q;
    }
    require(cur.pos() == seg_end, ErrorKind::Format, "DQT segment length mismatch");
}

inline void parse_dht(Cursor& cur, size_t seg_end, JpegStructure& st) {
    while (cur.pos() < seg_end) {
        const uint8_t tc_th = cur.u8();
        HuffTable t;
        t.table_class = tc_th >> 4;
        t.table_id = tc_th & 0x0F;
        require(t.table_class <= 1, ErrorKind::Format, "bad DHT class");
        require(t.table_id < 4, ErrorKind::Format, "bad DHT table id");
        size_t total = 0;
        for (int i = 0; i < 16; ++i) {
            t.spec.bits[static_cast<size_t>(i)] = cur.u8();
            total += t.spec.bits[static_cast<size_t>(i)];
        }
        require(total <= 256, ErrorKind::Format, "DHT with more than 256 symbols");
        t.spec.vals.resize(total);
        for (size_t i = 0; i < total; ++i) t.spec.vals[i] = cur.u8();
        // a redefinition replaces the previous table of the same class/id
        std::erase_if(st.huffman_tables, [&](const HuffTable& h) {
            return h.table_class == t.table_class && h.table_id == t.table_id;
        });
        st.huffman_tables.push_back(std::move(t));
    }
    require(cur.pos() == seg_end, ErrorKind::Format, "DHT segment length mismatch");
}

inline void parse_sof0(Cursor& cur, JpegStructure& st) {
    st.precision = cur.u8();
    require(st.precision == 8, ErrorKind::Unsupported, "only 8-bit precision is supported");
    st.height = cur.u16();
    st.width = cur.u16();
    require(st.width > 0 && st.height > 0, ErrorKind::Format, "zero frame dimensions");
    const int ncomp = cur.u8();
    require(ncomp == 1 || ncomp == 3, ErrorKind::Unsupported,
            "only 1- or 3-component frames are supported");
    for (int i = 0; i < ncomp; ++i) {
        FrameComponent c;
        c.id = cur.u8();
        const uint8_t hv = cur.u8();
        c.h = hv >> 4;
        c.v = hv & 0x0F;
        c.tq = cur.u8();
        require(c.tq < 4, ErrorKind::Format, "bad quant table selector");
        if (ncomp == 3) {
            require(c.h == 1 && c.v == 1, ErrorKind::Unsupported,
                    "only 4:4:4 colour sampling is supported");
        }
        st.components.push_back(c);
    }
}

struct ScanComponent {
    size_t comp_index = 0;
    int dc_table = 0, ac_table = 0;
};

struct ParseResult {
    JpegStructure structure;
    std::vector<ScanComponent> scan;
    bool saw_eoi = false;
};

/// Walks the marker stream up to the SOS header (or EOI for table-only
/// streams); entropy data is left to the caller.
inline ParseResult parse_stream(std::span<const uint8_t> data) {
    require(data.size() >= 2 && data[0] == 0xFF && data[1] == 0xD8, ErrorKind::Format,
            "not a JPEG stream (missing SOI)");
    ParseResult result;
    JpegStructure& st = result.structure;
    st.markers.push_back({0xD8, 0, 0});

    Cursor cur(data);
    cur.seek(2);
    bool have_frame = false;

    for (;;) {
        require(!cur.at_end(), ErrorKind::Truncated, "stream ended without EOI");
        const size_t marker_off = cur.pos();
        uint8_t b = cur.u8();
        require(b == 0xFF, ErrorKind::Format, "expected marker, found stray byte");
        uint8_t code = cur.u8();
        while (code == 0xFF) code = cur.u8();  // fill bytes
        require(code != 0x00, ErrorKind::Format, "invalid marker 0xFF00 outside scan");

        if (code == 0xD9) {  // EOI
            st.markers.push_back({code, marker_off, 0});
            result.saw_eoi = true;
            return result;
        }
        if (code == 0x01 || (code >= 0xD0 && code <= 0xD7)) {
            fail(ErrorKind::Format, "restart marker outside entropy data");
        }

        const uint16_t seg_len = cur.u16();
        require(seg_len >= 2, ErrorKind::Format, "segment length below 2");
        const size_t seg_end = marker_off + 2 + seg_len;
        st.markers.push_back({code, marker_off, seg_len});

        switch (code) {
            case 0xC0:
                require(!have_frame, ErrorKind::Format, "duplicate frame header");
                parse_sof0(cur, st);
                have_frame = true;
                break;
            case 0xC1:
            case 0xC3:
            case 0xC5:
            case 0xC6:
            case 0xC7:
            case 0xCD:
            case 0xCE:
            case 0xCF:
                fail(ErrorKind::Unsupported, "non-baseline frame type");
            case 0xC2:
                fail(ErrorKind::Unsupported, "progressive JPEG is not supported");
            case 0xC9:
            case 0xCA:
            case 0xCB:
                fail(ErrorKind::Unsupported, "arithmetic coding is not supported");
            case 0xC4:
                parse_dht(cur, seg_end, st);
                break;
            case 0xDB:
                parse_dqt(cur, seg_end, st);
                break;
            case 0xDD:
                require(seg_len == 4, ErrorKind::Format, "bad DRI length");
                st.restart_interval = cur.u16();
                break;
            case 0xDA: {
                require(have_frame, ErrorKind::Format, "scan before frame header");
                const int ns = cur.u8();
                require(ns == static_cast<int>(st.components.size()), ErrorKind::Unsupported,
                        "scan must cover all frame components");
                for (int i = 0; i < ns; ++i) {
                    const int cs = cur.u8();
                    const uint8_t td_ta = cur.u8();
                    bool found = false;
                    for (size_t ci = 0; ci < st.components.size(); ++ci) {
                        if (st.components[ci].id == cs) {
                            result.scan.push_back({ci, td_ta >> 4, td_ta & 0x0F});
                            found = true;
                            break;
                        }
                    }
                    require(found, ErrorKind::Format, "scan references unknown component");
                }
                cur.skip(3);  // spectral selection + approximation (fixed in baseline)
                st.scan_offset = cur.pos();
                return result;  // entropy data follows; caller decodes or stops
            }
            default:
                // APPn, COM, and anything else we do not interpret
                cur.skip(seg_end - cur.pos());
                break;
        }
        require(cur.pos() == seg_end, ErrorKind::Format, "segment parsed past its length");
    }
}

// at most 8 live tables (2 classes x 4 ids); callers reserve accordingly so
// returned references stay valid
inline const HuffDecoder& decoder_for(std::vector<std::pair<int, HuffDecoder>>& cache,
                                      const JpegStructure& st, int table_class, int table_id) {
    const int key = table_class * 4 + table_id;
    for (auto& [k, d] : cache) {
        if (k == key) return d;
    }
    for (const HuffTable& t : st.huffman_tables) {
        if (t.table_class == table_class && t.table_id == table_id) {
            cache.emplace_back(key, HuffDecoder(t.spec));
            return cache.back().second;
        }
    }
    fail(ErrorKind::Format, "scan references missing huffman table");
}

}  // namespace detail

/// Entropy-decodes a baseline stream to quantized coefficient blocks.
inline JpegCoefficients decode_coefficients(std::span<const uint8_t> data) {
    detail::ParseResult parsed = detail::parse_stream(data);
    JpegStructure& st = parsed.structure;
    require(!parsed.scan.empty(), ErrorKind::Format, "stream has no scan");

    JpegCoefficients out;
    const size_t ncomp = st.components.size();
    out.planes.resize(ncomp);
    for (size_t i = 0; i < ncomp; ++i) {
        CoeffPlane& p = out.planes[i];
        p.width = st.width;
        p.height = st.height;
        p.blocks_w = (st.width + 7) / 8;
        p.blocks_h = (st.height + 7) / 8;
        p.blocks.assign(static_cast<size_t>(p.blocks_w) * p.blocks_h, {});
        (void)st.quant_for_component(i);  // validates table presence
    }

    std::vector<std::pair<int, detail::HuffDecoder>> cache;
    cache.reserve(8);
    detail::BitReader br(data, st.scan_offset);
    std::vector<int32_t> dc_pred(ncomp, 0);

    const int mcus_x = out.planes[0].blocks_w;
    const int mcus_y = out.planes[0].blocks_h;
    int restart_countdown = st.restart_interval;
    int restart_index = 0;

    for (int my = 0; my < mcus_y; ++my) {
        for (int mx = 0; mx < mcus_x; ++mx) {
            if (st.restart_interval > 0 && restart_countdown == 0) {
                br.sync_restart(restart_index);
                restart_index = (restart_index + 1) & 7;
                restart_countdown = st.restart_interval;
                std::fill(dc_pred.begin(), dc_pred.end(), 0);
            }
            for (size_t sc = 0; sc < parsed.scan.size(); ++sc) {
                const detail::ScanComponent& comp = parsed.scan[sc];
                const auto& dc = detail::decoder_for(cache, st, 0, comp.dc_table);
                const auto& ac = detail::decoder_for(cache, st, 1, comp.ac_table);
                auto& block = out.planes[comp.comp_index].block(my, mx);

                const int t = detail::decode_symbol(br, dc);
                require(t <= 11, ErrorKind::Corrupt, "DC category out of range");
                dc_pred[comp.comp_index] += detail::extend_receive(br, t);
                block[0] = dc_pred[comp.comp_index];

                int k = 1;
                while (k < 64) {
                    const int rs = detail::decode_symbol(br, ac);
                    const int run = rs >> 4;
                    const int size = rs & 0x0F;
                    if (size == 0) {
                        if (run == 15) {
                            k += 16;
                            continue;
                        }
                        break;  // EOB
                    }
                    k += run;
                    require(k <= 63, ErrorKind::Corrupt, "AC coefficient index overflow");
                    block[kZigzagToNatural[static_cast<size_t>(k)]] =
                        detail::extend_receive(br, size);
                    ++k;
                }
            }
            if (st.restart_interval > 0) --restart_countdown;
        }
    }

    // after the scan: align to byte and require a clean EOI
    detail::Cursor tail(data);
    tail.seek(br.byte_pos());
    st.scan_length = br.byte_pos() - st.scan_offset;
    for (;;) {
        require(!tail.at_end(), ErrorKind::Truncated, "stream ended without EOI");
        uint8_t b = tail.u8();
        if (b != 0xFF) fail(ErrorKind::Corrupt, "garbage after entropy data");
        uint8_t code = tail.u8();
        while (code == 0xFF) code = tail.u8();
        if (code >= 0xD0 && code <= 0xD7) continue;  // stray restart at end
        require(code == 0xD9, ErrorKind::Format, "expected EOI after scan");
        st.markers.push_back({0xD9, tail.pos() - 2, 0});
        break;
    }
    out.structure = st;
    return out;
}

/// Quantization tables in natural order, one per frame component.
inline std::vector<QuantMatrix> extract_quant_tables(std::span<const uint8_t> data) {
    detail::ParseResult parsed = detail::parse_stream(data);
    const JpegStructure& st = parsed.structure;
    bool any = false;
    for (const auto& t : st.quant_tables) any = any || t.has_value();
    require(any, ErrorKind::Format, "stream carries no DQT segment");
    require(!st.components.empty(), ErrorKind::Format, "stream carries no frame header");
    std::vector<QuantMatrix> out;
    for (size_t i = 0; i < st.components.size(); ++i) out.push_back(st.quant_for_component(i));
    return out;
}

struct DecodedJpeg {
    std::variant<GreyImage8, RgbImage8> image;
    JpegStructure structure;

    bool is_grey() const { return std::holds_alternative<GreyImage8>(image); }
    const GreyImage8& grey() const { return std::get<GreyImage8>(image); }
    const RgbImage8& rgb() const { return std::get<RgbImage8>(image); }
};

/// Full decode to 8-bit pixels plus the parsed structure.
inline DecodedJpeg decode_jpeg(std::span<const uint8_t> data) {
    JpegCoefficients coeffs = decode_coefficients(data);
    const JpegStructure& st = coeffs.structure;
    const size_t ncomp = st.components.size();

    // per-component spatial planes
    std::vector<std::vector<uint8_t>> spatial(ncomp);
    int32_t block_int[64];
    for (size_t ci = 0; ci < ncomp; ++ci) {
        const CoeffPlane& p = coeffs.planes[ci];
        const QuantMatrix& q = st.quant_for_component(ci);
        auto& plane = spatial[ci];
        plane.assign(static_cast<size_t>(st.width) * st.height, 0);
        for (int by = 0; by < p.blocks_h; ++by) {
            for (int bx = 0; bx < p.blocks_w; ++bx) {
                detail::idct_islow(p.block(by, bx).data(), q.values.data(), block_int, nullptr);
                const int y_max = std::min(8, st.height - by * 8);
                const int x_max = std::min(8, st.width - bx * 8);
                for (int y = 0; y < y_max; ++y) {
                    for (int x = 0; x < x_max; ++x) {
                        plane[static_cast<size_t>(by * 8 + y) * st.width + (bx * 8 + x)] =
                            detail::clamp_sample(block_int[y * 8 + x] + 128);
                    }
                }
            }
        }
    }

    DecodedJpeg out;
    out.structure = st;
    if (ncomp == 1) {
        GreyImage8 img = GreyImage8::allocate(st.width, st.height);
        img.pixels = std::move(spatial[0]);
        out.image = std::move(img);
    } else {
        const auto& t = detail::ycc_tables();
        RgbImage8 img = RgbImage8::allocate(st.width, st.height);
        for (size_t i = 0; i < img.pixel_count(); ++i) {
            const int32_t y = spatial[0][i];
            const int32_t cb = spatial[1][i];
            const int32_t cr = spatial[2][i];
            img.r[i] = detail::clamp_sample(y + t.crr[static_cast<size_t>(cr)]);
            img.g[i] = detail::clamp_sample(
                y + ((t.cbg[static_cast<size_t>(cb)] + t.crg[static_cast<size_t>(cr)]) >> 16));
            img.b[i] = detail::clamp_sample(y + t.cbb[static_cast<size_t>(cb)]);
        }
        out.image = std::move(img);
    }
    return out;
}

struct UnroundedImage {
    int width = 0, height = 0;
    std::vector<double> values;  // row-major, level-shifted, not rounded or clamped

    double at(int row, int col) const { return values[static_cast<size_t>(row) * width + col]; }
};

/// Grey decode without the final rounding/clamping: real-valued samples whose
/// round-half-up + clamp reproduce decode_jpeg exactly.
inline UnroundedImage decode_unrounded(std::span<const uint8_t> data) {
    JpegCoefficients coeffs = decode_coefficients(data);
    const JpegStructure& st = coeffs.structure;
    require(st.components.size() == 1, ErrorKind::Unsupported,
            "unrounded decode is defined for grey streams");

    UnroundedImage out;
    out.width = st.width;
    out.height = st.height;
    out.values.assign(static_cast<size_t>(st.width) * st.height, 0.0);

    const CoeffPlane& p = coeffs.planes[0];
    const QuantMatrix& q = st.quant_for_component(0);
    int32_t block_int[64];
    double block_real[64];
    for (int by = 0; by < p.blocks_h; ++by) {
        for (int bx = 0; bx < p.blocks_w; ++bx) {
            detail::idct_islow(p.block(by, bx).data(), q.values.data(), block_int, block_real);
            const int y_max = std::min(8, st.height - by * 8);
            const int x_max = std::min(8, st.width - bx * 8);
            for (int y = 0; y < y_max; ++y) {
                for (int x = 0; x < x_max; ++x) {
                    out.values[static_cast<size_t>(by * 8 + y) * st.width + (bx * 8 + x)] =
                        block_real[y * 8 + x];
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Encoding

namespace detail {

struct EncodeComponent {
    const CoeffPlane* plane = nullptr;
    const QuantMatrix* quant = nullptr;
    int quant_id = 0;
    bool chroma_huff = false;
};

inline Bytes serialize_baseline(int width, int height,
                                const std::vector<EncodeComponent>& comps) {
    Bytes out;
    marker(out, 0xD8);

    // APP0 / JFIF 1.01, square pixels, no thumbnail
    marker(out, 0xE0);
    be16(out, 16);
    const uint8_t jfif[] = {'J', 'F', 'I', 'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0};
    out.insert(out.end(), std::begin(jfif), std::end(jfif));

    // one DQT segment per distinct table id
    std::array<bool, 4> emitted{};
    for (const auto& c : comps) {
        if (emitted[static_cast<size_t>(c.quant_id)]) continue;
        emitted[static_cast<size_t>(c.quant_id)] = true;
        marker(out, 0xDB);
        be16(out, 67);
        out.push_back(static_cast<uint8_t>(c.quant_id));  // 8-bit precision
        for (int k = 0; k < 64; ++k) {
            out.push_back(static_cast<uint8_t>(
                c.quant->values[kZigzagToNatural[static_cast<size_t>(k)]]));
        }
    }

    // SOF0
    marker(out, 0xC0);
    be16(out, static_cast<uint16_t>(8 + 3 * comps.size()));
    out.push_back(8);
    be16(out, static_cast<uint16_t>(height));
    be16(out, static_cast<uint16_t>(width));
    out.push_back(static_cast<uint8_t>(comps.size()));
    for (size_t i = 0; i < comps.size(); ++i) {
        out.push_back(static_cast<uint8_t>(i + 1));  // component id
        out.push_back(0x11);                         // 1x1 sampling
        out.push_back(static_cast<uint8_t>(comps[i].quant_id));
    }

    // DHT segments
    auto emit_dht = [&](int table_class, int table_id, const HuffSpec& spec) {
        marker(out, 0xC4);
        be16(out, static_cast<uint16_t>(19 + spec.vals.size()));
        out.push_back(static_cast<uint8_t>((table_class << 4) | table_id));
        for (uint8_t b : spec.bits) out.push_back(b);
        out.insert(out.end(), spec.vals.begin(), spec.vals.end());
    };
    bool need_luma = false, need_chroma = false;
    for (const auto& c : comps) (c.chroma_huff ? need_chroma : need_luma) = true;
    if (need_luma) {
        emit_dht(0, 0, std_huff_dc_luma());
        emit_dht(1, 0, std_huff_ac_luma());
    }
    if (need_chroma) {
        emit_dht(0, 1, std_huff_dc_chroma());
        emit_dht(1, 1, std_huff_ac_chroma());
    }

    // SOS
    marker(out, 0xDA);
    be16(out, static_cast<uint16_t>(6 + 2 * comps.size()));
    out.push_back(static_cast<uint8_t>(comps.size()));
    for (size_t i = 0; i < comps.size(); ++i) {
        out.push_back(static_cast<uint8_t>(i + 1));
        const uint8_t table = comps[i].chroma_huff ? 0x11 : 0x00;
        out.push_back(table);
    }
    out.push_back(0);
    out.push_back(63);
    out.push_back(0);

    // entropy-coded data
    const HuffEncoder dc_luma(std_huff_dc_luma()), ac_luma(std_huff_ac_luma());
    const HuffEncoder dc_chroma(std_huff_dc_chroma()), ac_chroma(std_huff_ac_chroma());
    BitWriter bw(out);
    std::vector<int32_t> dc_pred(comps.size(), 0);

    const int mcus_x = comps[0].plane->blocks_w;
    const int mcus_y = comps[0].plane->blocks_h;
    for (int my = 0; my < mcus_y; ++my) {
        for (int mx = 0; mx < mcus_x; ++mx) {
            for (size_t ci = 0; ci < comps.size(); ++ci) {
                const auto& block = comps[ci].plane->block(my, mx);
                const HuffEncoder& dc = comps[ci].chroma_huff ? dc_chroma : dc_luma;
                const HuffEncoder& ac = comps[ci].chroma_huff ? ac_chroma : ac_luma;

                const int32_t diff = block[0] - dc_pred[ci];
                dc_pred[ci] = block[0];
                const int dcat = bit_category(diff);
                require(dcat <= 11, ErrorKind::Argument, "DC difference too large for baseline");
                dc.emit(bw, static_cast<uint8_t>(dcat));
                if (dcat > 0) {
                    const int32_t bits = diff < 0 ? diff + (1 << dcat) - 1 : diff;
                    bw.put(static_cast<uint32_t>(bits), dcat);
                }

                int run = 0;
                for (int k = 1; k < 64; ++k) {
                    const int32_t v = block[kZigzagToNatural[static_cast<size_t>(k)]];
                    if (v == 0) {
                        ++run;
                        continue;
                    }
                    while (run > 15) {
                        ac.emit(bw, 0xF0);  // ZRL
                        run -= 16;
                    }
                    const int cat = bit_category(v);
                    require(cat <= 10, ErrorKind::Argument, "AC coefficient too large for baseline");
                    ac.emit(bw, static_cast<uint8_t>((run << 4) | cat));
                    const int32_t bits = v < 0 ? v + (1 << cat) - 1 : v;
                    bw.put(static_cast<uint32_t>(bits), cat);
                    run = 0;
                }
                if (run > 0) ac.emit(bw, 0x00);  // EOB
            }
        }
    }
    bw.flush();

    marker(out, 0xD9);
    return out;
}

inline CoeffPlane quantize_plane(const std::vector<uint8_t>& samples, int width, int height,
                                 const QuantMatrix& quant) {
    CoeffPlane p;
    p.width = width;
    p.height = height;
    p.blocks_w = width / 8;
    p.blocks_h = height / 8;
    p.blocks.assign(static_cast<size_t>(p.blocks_w) * p.blocks_h, {});
    const QuantDivisors divisors(quant);
    double block[64];
    for (int by = 0; by < p.blocks_h; ++by) {
        for (int bx = 0; bx < p.blocks_w; ++bx) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    block[y * 8 + x] =
                        static_cast<double>(
                            samples[static_cast<size_t>(by * 8 + y) * width + (bx * 8 + x)]) -
                        128.0;
                }
            }
            fdct_quantize(block, divisors, p.block(by, bx).data());
        }
    }
    return p;
}

inline void check_encode_dims(int width, int height) {
    require(width >= 8 && height >= 8 && width % 8 == 0 && height % 8 == 0, ErrorKind::Argument,
            "encoder requires dimensions that are multiples of 8, got " + std::to_string(width) +
                "x" + std::to_string(height));
}

}  // namespace detail

inline Bytes encode_jpeg(const GreyImage8& img, const QuantMatrix& quant) {
    detail::check_encode_dims(img.width, img.height);
    quant.validate_for_encoding();
    const CoeffPlane plane_storage =
        detail::quantize_plane(img.pixels, img.width, img.height, quant);
    std::vector<detail::EncodeComponent> comps(1);
    comps[0] = {&plane_storage, &quant, 0, false};
    return detail::serialize_baseline(img.width, img.height, comps);
}

inline Bytes encode_jpeg(const GreyImage8& img, int quality) {
    return encode_jpeg(img, std_quant_matrix(quality, TableKind::Luminance));
}

inline Bytes encode_jpeg(const RgbImage8& img, const QuantMatrix& luma, const QuantMatrix& chroma) {
    detail::check_encode_dims(img.width, img.height);
    luma.validate_for_encoding();
    chroma.validate_for_encoding();

    // JFIF RGB -> YCbCr
    const size_t n = img.pixel_count();
    std::vector<uint8_t> yp(n), cbp(n), crp(n);
    for (size_t i = 0; i < n; ++i) {
        const double r = img.r[i], g = img.g[i], b = img.b[i];
        const double y = 0.299 * r + 0.587 * g + 0.114 * b;
        const double cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
        const double cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
        auto clamp8 = [](double v) {
            return static_cast<uint8_t>(v <= 0.0 ? 0 : (v >= 255.0 ? 255 : std::floor(v + 0.5)));
        };
        yp[i] = clamp8(y);
        cbp[i] = clamp8(cb);
        crp[i] = clamp8(cr);
    }

    const CoeffPlane py = detail::quantize_plane(yp, img.width, img.height, luma);
    const CoeffPlane pcb = detail::quantize_plane(cbp, img.width, img.height, chroma);
    const CoeffPlane pcr = detail::quantize_plane(crp, img.width, img.height, chroma);
    std::vector<detail::EncodeComponent> comps(3);
    comps[0] = {&py, &luma, 0, false};
    comps[1] = {&pcb, &chroma, 1, true};
    comps[2] = {&pcr, &chroma, 1, true};
    return detail::serialize_baseline(img.width, img.height, comps);
}

inline Bytes encode_jpeg(const RgbImage8& img, int quality) {
    return encode_jpeg(img, std_quant_matrix(quality, TableKind::Luminance),
                       std_quant_matrix(quality, TableKind::Chrominance));
}

/// Re-emits coefficient blocks with their original quantization tables.
inline Bytes encode_from_coefficients(const JpegCoefficients& coeffs) {
    const JpegStructure& st = coeffs.structure;
    require(!coeffs.planes.empty() && coeffs.planes.size() == st.components.size(),
            ErrorKind::Argument, "coefficient planes do not match structure");
    std::vector<QuantMatrix> quants;
    quants.reserve(coeffs.planes.size());
    for (size_t i = 0; i < coeffs.planes.size(); ++i) quants.push_back(st.quant_for_component(i));
    std::vector<detail::EncodeComponent> comps(coeffs.planes.size());
    for (size_t i = 0; i < coeffs.planes.size(); ++i) {
        comps[i] = {&coeffs.planes[i], &quants[i], st.components[i].tq, i > 0};
    }
    return detail::serialize_baseline(st.width, st.height, comps);
}

/// Decodes and re-encodes at a target quality. preserve_nonstandard keeps a
/// non-standard input's character by re-targeting its tables instead of
/// substituting the standard ones.
inline Bytes recompress(std::span<const uint8_t> data, int target_quality,
                        bool preserve_nonstandard) {
    const DecodedJpeg decoded = decode_jpeg(data);
    if (decoded.is_grey()) {
        QuantMatrix t = preserve_nonstandard
                            ? nonstandard_target(decoded.structure.quant_for_component(0),
                                                 target_quality, TableKind::Luminance)
                            : std_quant_matrix(target_quality, TableKind::Luminance);
        return encode_jpeg(decoded.grey(), t);
    }
    QuantMatrix luma, chroma;
    if (preserve_nonstandard) {
        luma = nonstandard_target(decoded.structure.quant_for_component(0), target_quality,
                                  TableKind::Luminance);
        chroma = nonstandard_target(decoded.structure.quant_for_component(1), target_quality,
                                    TableKind::Chrominance);
    } else {
        luma = std_quant_matrix(target_quality, TableKind::Luminance);
        chroma = std_quant_matrix(target_quality, TableKind::Chrominance);
    }
    return encode_jpeg(decoded.rgb(), luma, chroma);
}

}  // namespace lssd::jpeg
