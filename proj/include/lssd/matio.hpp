#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lssd/error.hpp"

namespace lssd::mat {

// Minimal MAT level-5 support: one real double-precision 2-D array per file.
// Layout written here:
//   128-byte header (text + version 0x0100 + endian tag "IM")
//   miMATRIX element
//     miUINT32 array flags   (mxDOUBLE_CLASS)
//     miINT32  dimensions    [rows cols]
//     miINT8   name
//     miDOUBLE data          column-major
// A 256x256 array therfore carries exactly 524,288 payload bytes.

inline constexpr uint32_t kMiInt8 = 1;
inline constexpr uint32_t kMiInt32 = 5;
inline constexpr uint32_t kMiUint32 = 6;
inline constexpr uint32_t kMiDouble = 9;
inline constexpr uint32_t kMiMatrix = 14;
inline constexpr uint32_t kMxDoubleClass = 6;

struct Array {
    int rows = 0;
    int cols = 0;
    std::string name;
    std::vector<double> values;  // row-major in memory

    double at(int row, int col) const { return values[static_cast<size_t>(row) * cols + col]; }
};

namespace detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

inline void pad_to_8(std::vector<uint8_t>& out) {
    while (out.size() % 8 != 0) out.push_back(0);
}

}  // namespace detail

inline void write_array(const Array& array, const std::filesystem::path& path) {
    require(array.rows > 0 && array.cols > 0, ErrorKind::Argument, "empty array");
    require(array.values.size() == static_cast<size_t>(array.rows) * array.cols,
            ErrorKind::Argument, "value count does not match dimensions");
    require(!array.name.empty() && array.name.size() <= 63, ErrorKind::Argument,
            "array name must be 1..63 bytes");

    std::vector<uint8_t> body;
    // array flags
    detail::put_u32(body, kMiUint32);
    detail::put_u32(body, 8);
    detail::put_u32(body, kMxDoubleClass);
    detail::put_u32(body, 0);
    // dimensions
    detail::put_u32(body, kMiInt32);
    detail::put_u32(body, 8);
    detail::put_u32(body, static_cast<uint32_t>(array.rows));
    detail::put_u32(body, static_cast<uint32_t>(array.cols));
    // name
    detail::put_u32(body, kMiInt8);
    detail::put_u32(body, static_cast<uint32_t>(array.name.size()));
    for (char c : array.name) body.push_back(static_cast<uint8_t>(c));
    detail::pad_to_8(body);
    // data, column-major
    detail::put_u32(body, kMiDouble);
    detail::put_u32(body, static_cast<uint32_t>(array.values.size() * 8));
    for (int col = 0; col < array.cols; ++col) {
        for (int row = 0; row < array.rows; ++row) {
            const double v = array.at(row, col);
            uint8_t bytes[8];
            std::memcpy(bytes, &v, 8);
            body.insert(body.end(), bytes, bytes + 8);
        }
    }

    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot create " + path.string());

    char header[128];
    std::memset(header, ' ', sizeof(header));
    const std::string text = "MATLAB 5.0 MAT-file, created by lssd";
    std::memcpy(header, text.data(), text.size());
    header[124] = 0x00;  // version 0x0100, little-endian
    header[125] = 0x01;
    header[126] = 'I';
    header[127] = 'M';
    out.write(header, sizeof(header));

    uint8_t tag[8];
    const uint32_t type = kMiMatrix;
    const uint32_t size = static_cast<uint32_t>(body.size());
    std::memcpy(tag, &type, 4);
    std::memcpy(tag + 4, &size, 4);
    out.write(reinterpret_cast<const char*>(tag), 8);
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

/// Reads back a file produced by write_array (uncompressed single array).
inline Array read_array(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::Io, "cannot open " + path.string());
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    require(data.size() > 136, ErrorKind::Format, "file too small for a MAT array");
    require(std::memcmp(data.data(), "MATLAB 5.0", 10) == 0, ErrorKind::Format,
            "missing MAT level-5 header text");
    require(data[126] == 'I' && data[127] == 'M', ErrorKind::Format,
            "unsupported byte order (expected little-endian)");

    size_t pos = 128;
    auto u32 = [&](size_t at) {
        uint32_t v;
        std::memcpy(&v, data.data() + at, 4);
        return v;
    };
    require(u32(pos) == kMiMatrix, ErrorKind::Format, "first element is not a matrix");
    pos += 8;

    require(u32(pos) == kMiUint32 && u32(pos + 4) == 8, ErrorKind::Format, "bad array flags");
    require((u32(pos + 8) & 0xFF) == kMxDoubleClass, ErrorKind::Format,
            "array class is not double");
    pos += 16;

    require(u32(pos) == kMiInt32 && u32(pos + 4) == 8, ErrorKind::Format,
            "expected 2-D dimensions");
    Array out;
    out.rows = static_cast<int>(u32(pos + 8));
    out.cols = static_cast<int>(u32(pos + 12));
    pos += 16;

    require(u32(pos) == kMiInt8, ErrorKind::Format, "expected array name element");
    const uint32_t name_len = u32(pos + 4);
    out.name.assign(reinterpret_cast<const char*>(data.data() + pos + 8), name_len);
    pos += 8 + ((name_len + 7) / 8) * 8;

    require(u32(pos) == kMiDouble, ErrorKind::Format, "expected double data element");
    const uint32_t bytes = u32(pos + 4);
    require(bytes == static_cast<uint64_t>(out.rows) * out.cols * 8, ErrorKind::Format,
            "data element size mismatch");
    pos += 8;
    require(pos + bytes <= data.size(), ErrorKind::Truncated, "data element overruns file");

    out.values.assign(static_cast<size_t>(out.rows) * out.cols, 0.0);
    size_t k = pos;
    for (int col = 0; col < out.cols; ++col) {
        for (int row = 0; row < out.rows; ++row) {
            double v;
            std::memcpy(&v, data.data() + k, 8);
            out.values[static_cast<size_t>(row) * out.cols + col] = v;
            k += 8;
        }
    }
    return out;
}

}  // namespace lssd::mat
