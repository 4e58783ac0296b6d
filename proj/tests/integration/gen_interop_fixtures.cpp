// Writes cross-language interop fixtures: Q75 streams from this codec, this
// decoder's pixel dumps, an unrounded decode, and a MAT export. The Python
// checks compare them against Pillow and scipy.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lssd/dataset.hpp"
#include "lssd/jpeg_codec.hpp"
#include "support/fixtures.hpp"

using namespace lssd;
namespace fs = std::filesystem;

namespace {

void dump(const fs::path& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: gen_interop_fixtures <dir>\n");
        return 2;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir);

    for (uint64_t key = 0; key < 4; ++key) {
        const std::string stem = "grey_" + std::to_string(key);
        const GreyImage8 tile = testfix::textured_tile(200 + key);
        const jpeg::Bytes bytes = jpeg::encode_jpeg(tile, 75);
        dump(dir / (stem + ".jpg"), bytes.data(), bytes.size());

        const GreyImage8 dec = jpeg::decode_jpeg(bytes).grey();
        dump(dir / (stem + ".raw"), dec.pixels.data(), dec.pixels.size());

        const jpeg::UnroundedImage u = jpeg::decode_unrounded(bytes);
        dump(dir / (stem + ".f64"), u.values.data(), u.values.size() * 8);

        export_decompressed(bytes, dir / (stem + ".mat"));
    }

    for (uint64_t key = 0; key < 2; ++key) {
        const std::string stem = "colour_" + std::to_string(key);
        const RgbImage8 tile = testfix::textured_colour_tile(300 + key);
        const jpeg::Bytes bytes = jpeg::encode_jpeg(tile, 75);
        dump(dir / (stem + ".jpg"), bytes.data(), bytes.size());

        const RgbImage8 dec = jpeg::decode_jpeg(bytes).rgb();
        std::vector<uint8_t> interleaved(dec.pixel_count() * 3);
        for (size_t i = 0; i < dec.pixel_count(); ++i) {
            interleaved[3 * i] = dec.r[i];
            interleaved[3 * i + 1] = dec.g[i];
            interleaved[3 * i + 2] = dec.b[i];
        }
        dump(dir / (stem + ".raw"), interleaved.data(), interleaved.size());
    }

    std::printf("interop fixtures written to %s\n", dir.string().c_str());
    return 0;
}
