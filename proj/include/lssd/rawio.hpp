#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lssd/error.hpp"
#include "lssd/image.hpp"

namespace lssd {

// Portable sensor format: a binary 16-bit greymap (P5, maxval 65535,
// big-endian samples) holding the mosaic, plus a sidecar text file next to it
// (same stem, extension .cfa) with two key=value lines:
//
//     pattern=RGGB
//     white_level=4095

namespace detail {

inline std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
    std::filesystem::path p = pgm_path;
    p.replace_extension(".cfa");
    return p;
}

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

inline long pnm_int(std::istream& in, const char* what) {
    const std::string tok = pnm_token(in);
    require(!tok.empty(), ErrorKind::Format, std::string("missing ") + what + " in greymap header");
    for (char c : tok) {
        require(std::isdigit(static_cast<unsigned char>(c)), ErrorKind::Format,
                std::string("non-numeric ") + what + " in greymap header");
    }
    return std::stol(tok);
}

}  // namespace detail

/// Reads a 16-bit P5 greymap plus its .cfa sidecar into a CfaImage.
/// Samples come back bit-exactly as stored.
inline CfaImage read_cfa(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::Io, "cannot open " + path.string());

    const std::string magic = detail::pnm_token(in);
    require(magic == "P5", ErrorKind::Format, "not a binary greymap (magic '" + magic + "')");
    const long width = detail::pnm_int(in, "width");
    const long height = detail::pnm_int(in, "height");
    const long maxval = detail::pnm_int(in, "maxval");
    require(maxval > 255 && maxval <= 65535, ErrorKind::Format,
            "not a 16-bit greymap (maxval " + std::to_string(maxval) + ")");
    require(width >= 2 && height >= 2 && width % 2 == 0 && height % 2 == 0, ErrorKind::Invariant,
            "mosaic dimensions must be even and >= 2, got " + std::to_string(width) + "x" +
                std::to_string(height));
    // pnm_token consumed the single whitespace ending the header; the
    // payload starts here

    CfaImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.samples.resize(static_cast<size_t>(width) * height);

    std::vector<uint8_t> raw(img.samples.size() * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(static_cast<size_t>(in.gcount()) == raw.size(), ErrorKind::Format,
            "greymap payload shorter than header promises");
    for (size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }

    // sidecar: pattern + white_level
    const std::filesystem::path side = detail::sidecar_path(path);
    std::ifstream meta(side);
    require(meta.good(), ErrorKind::Metadata, "missing sidecar " + side.string());
    bool have_pattern = false, have_white = false;
    std::string line;
    while (std::getline(meta, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::Metadata, "sidecar line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "pattern") {
            img.pattern = parse_bayer_pattern(value);
            have_pattern = true;
        } else if (key == "white_level") {
            const long w = std::stol(value);
            require(w >= 1 && w <= 65535, ErrorKind::Metadata, "white_level out of range: " + value);
            img.white_level = static_cast<uint16_t>(w);
            have_white = true;
        } else {
            fail(ErrorKind::Metadata, "unknown sidecar key '" + key + "'");
        }
    }
    require(have_pattern && have_white, ErrorKind::Metadata,
            "sidecar must declare pattern and white_level");

    img.validate();
    return img;
}

/// Writes the mosaic and its sidecar; read_cfa(write_cfa(x)) is bit-identical.
inline void write_cfa(const CfaImage& img, const std::filesystem::path& path) {
    img.validate();

    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot create " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<uint8_t> raw(img.samples.size() * 2);
    for (size_t i = 0; i < img.samples.size(); ++i) {
        raw[2 * i] = static_cast<uint8_t>(img.samples[i] >> 8);
        raw[2 * i + 1] = static_cast<uint8_t>(img.samples[i] & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
    out.close();

    std::ofstream meta(detail::sidecar_path(path));
    require(meta.good(), ErrorKind::Io, "cannot create sidecar for " + path.string());
    meta << "pattern=" << to_string(img.pattern) << "\n"
         << "white_level=" << img.white_level << "\n";
    require(meta.good(), ErrorKind::Io, "sidecar write failed for " + path.string());
}

/// Samples an RGB image through a Bayer mask: each site keeps exactly the
/// value of the channel the pattern assigns there, no interpolation.
inline CfaImage simulate_cfa(const RgbImage16& rgb, BayerPattern pattern) {
    require(rgb.width >= 2 && rgb.height >= 2, ErrorKind::Invariant, "image too small to mosaic");
    require(rgb.width % 2 == 0 && rgb.height % 2 == 0, ErrorKind::Invariant,
            "mosaic requires even dimensions");
    CfaImage cfa;
    cfa.width = rgb.width;
    cfa.height = rgb.height;
    cfa.pattern = pattern;
    cfa.white_level = 65535;
    cfa.samples.resize(rgb.pixel_count());
    for (int y = 0; y < rgb.height; ++y) {
        for (int x = 0; x < rgb.width; ++x) {
            const size_t i = static_cast<size_t>(y) * rgb.width + x;
            switch (channel_at(pattern, y, x)) {
                case Channel::Red: cfa.samples[i] = rgb.r[i]; break;
                case Channel::Green: cfa.samples[i] = rgb.g[i]; break;
                case Channel::Blue: cfa.samples[i] = rgb.b[i]; break;
            }
        }
    }
    return cfa;
}

/// 8-bit binary P5 export (1024x1024 grey intermediates).
inline void write_pgm8(const GreyImage8& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot create " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

/// 8-bit binary P6 export (1024x1024 colour intermediates).
inline void write_ppm8(const RgbImage8& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot create " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const size_t i = static_cast<size_t>(y) * img.width + x;
            row[3 * x] = img.r[i];
            row[3 * x + 1] = img.g[i];
            row[3 * x + 2] = img.b[i];
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace lssd
