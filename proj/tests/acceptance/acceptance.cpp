// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line through the listener below. The reference JPEG decoder here is the
// system libjpeg, fully independent of this codebase.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <jpeglib.h>

#include "lssd/batch.hpp"
#include "lssd/dataset.hpp"
#include "lssd/develop.hpp"
#include "lssd/jpeg_codec.hpp"
#include "lssd/matio.hpp"
#include "lssd/rawio.hpp"
#include "lssd/recipe.hpp"
#include "support/fixtures.hpp"

#include "fixtures/quant_tables_oracle.inc"

using namespace lssd;
namespace fs = std::filesystem;

namespace {

class CriterionReporter : public Catch::EventListenerBase {
public:
    using Catch::EventListenerBase::EventListenerBase;

    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        std::printf("%-72s %s\n", stats.testInfo->name.c_str(),
                    stats.totals.assertions.allPassed() ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- independent reference decoder -----------------------------------------

struct JpegErrorTrap {
    jpeg_error_mgr mgr;
    jmp_buf jump;
};

void on_libjpeg_error(j_common_ptr cinfo) {
    longjmp(reinterpret_cast<JpegErrorTrap*>(cinfo->err)->jump, 1);
}

bool reference_decode(const jpeg::Bytes& data, std::vector<uint8_t>& pixels, int& width,
                      int& height, int& components) {
    jpeg_decompress_struct cinfo;
    JpegErrorTrap trap;
    cinfo.err = jpeg_std_error(&trap.mgr);
    trap.mgr.error_exit = on_libjpeg_error;
    if (setjmp(trap.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    components = cinfo.output_components;
    pixels.resize(static_cast<size_t>(width) * height * components);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + static_cast<size_t>(cinfo.output_scanline) * width * components;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

// --- shared fixtures --------------------------------------------------------

const std::map<Source, size_t> kTable1Counts = {
    {Source::Alaska2, 80005}, {Source::Boss, 10000},   {Source::StegoAppDb, 24120},
    {Source::Wesaturate, 3648}, {Source::Raise, 8156}, {Source::Dresden, 1491},
};

SourceCatalog synthetic_catalog(const std::map<Source, size_t>& counts) {
    SourceCatalog catalog;
    for (const auto& [source, n] : counts) {
        for (size_t i = 0; i < n; ++i) {
            char id[64];
            std::snprintf(id, sizeof(id), "%s/%06zu", to_string(source), i);
            catalog.entries.push_back({id, source, {}});
        }
    }
    catalog.sort_and_check();
    return catalog;
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
    std::map<std::string, std::string> digests;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
        digests[fs::relative(e.path(), root).string()] = Sha256::hex_digest(data);
    }
    return digests;
}

}  // namespace

CATCH_REGISTER_LISTENER(CriterionReporter)

TEST_CASE("criterion 01: quantization formula matches the brute-force oracle") {
    const auto t0 = std::chrono::steady_clock::now();
    for (int q = 1; q <= 100; ++q) {
        const jpeg::QuantMatrix luma = jpeg::std_quant_matrix(q, jpeg::TableKind::Luminance);
        const jpeg::QuantMatrix chroma = jpeg::std_quant_matrix(q, jpeg::TableKind::Chrominance);
        for (int i = 0; i < 64; ++i) {
            REQUIRE(luma.values[i] == kOracleLuma[q - 1][i]);
            REQUIRE(chroma.values[i] == kOracleChroma[q - 1][i]);
            REQUIRE(luma.values[i] >= 1);
            REQUIRE(luma.values[i] <= 255);
        }
    }
    // elementwise non-increasing in Q
    for (auto kind : {jpeg::TableKind::Luminance, jpeg::TableKind::Chrominance}) {
        jpeg::QuantMatrix prev = jpeg::std_quant_matrix(1, kind);
        for (int q = 2; q <= 100; ++q) {
            const jpeg::QuantMatrix cur = jpeg::std_quant_matrix(q, kind);
            for (int i = 0; i < 64; ++i) REQUIRE(cur.values[i] <= prev.values[i]);
            prev = cur;
        }
    }
    REQUIRE(jpeg::std_quant_matrix(50) == jpeg::base_table(jpeg::TableKind::Luminance));
    for (uint16_t v : jpeg::std_quant_matrix(100).values) REQUIRE(v == 1);
    CHECK(seconds_since(t0) < 1.0);
}

TEST_CASE("criterion 02: every Q75 tile stream carries exactly the standard table") {
    for (uint64_t key = 0; key < 6; ++key) {
        const auto grey = jpeg::encode_jpeg(testfix::textured_tile(key), 75);
        const auto tables = jpeg::extract_quant_tables(grey);
        REQUIRE(tables.size() == 1);
        REQUIRE(tables[0] == jpeg::std_quant_matrix(75, jpeg::TableKind::Luminance));
    }
    const auto colour = jpeg::encode_jpeg(testfix::textured_colour_tile(7), 75);
    const auto tables = jpeg::extract_quant_tables(colour);
    REQUIRE(tables.size() == 3);
    REQUIRE(tables[0] == jpeg::std_quant_matrix(75, jpeg::TableKind::Luminance));
    REQUIRE(tables[1] == jpeg::std_quant_matrix(75, jpeg::TableKind::Chrominance));
    REQUIRE(tables[2] == jpeg::std_quant_matrix(75, jpeg::TableKind::Chrominance));
}

TEST_CASE("criterion 03: quality-factor forensics recover standard and perturbed tables") {
    for (auto kind : {jpeg::TableKind::Luminance, jpeg::TableKind::Chrominance}) {
        for (int q = 1; q <= 100; ++q) {
            const jpeg::QuantMatrix m = jpeg::std_quant_matrix(q, kind);
            const jpeg::QfEstimate est = jpeg::estimate_qf(m, kind);
            REQUIRE(est.is_standard);
            REQUIRE(est.distance == 0.0);
            REQUIRE(jpeg::std_quant_matrix(est.q_estimated, kind) == m);
        }
    }
    for (int q : {50, 75, 95}) {
        jpeg::QuantMatrix m = jpeg::std_quant_matrix(q);
        m.at(7, 7) = static_cast<uint16_t>(m.at(7, 7) + 1);
        const jpeg::QfEstimate est = jpeg::estimate_qf(m);
        REQUIRE_FALSE(est.is_standard);
        REQUIRE(est.q_estimated == q);
    }
}

TEST_CASE("criterion 04: test partition reproduces the published per-source counts") {
    const auto t0 = std::chrono::steady_clock::now();
    const SourceCatalog catalog = synthetic_catalog(kTable1Counts);
    REQUIRE(catalog.size() == 127420);

    const TestPartition part = partition_test(catalog, 6250, {Source::Dresden}, 20260810);
    REQUIRE(part.test_ids.size() == 6250);

    const std::map<Source, size_t> expected = {
        {Source::Alaska2, 3970}, {Source::StegoAppDb, 1197}, {Source::Boss, 496},
        {Source::Raise, 404},    {Source::Wesaturate, 183},  {Source::Dresden, 0},
    };
    for (const auto& [source, count] : expected) {
        const long long actual = static_cast<long long>(part.test_counts.at(source));
        if (source == Source::Dresden) {
            REQUIRE(actual == 0);
        } else {
            REQUIRE(std::llabs(actual - static_cast<long long>(count)) <= 2);
        }
    }
    CHECK(seconds_since(t0) < 5.0);
}

TEST_CASE("criterion 05: nested subsets stay nested with tight source ratios") {
    const std::map<Source, size_t> scaled = {
        {Source::Alaska2, 800}, {Source::Boss, 100},   {Source::StegoAppDb, 241},
        {Source::Wesaturate, 36}, {Source::Raise, 82}, {Source::Dresden, 15},
    };
    const SourceCatalog pool = synthetic_catalog(scaled);
    const SplitPlan plan = nested_subsets(pool, {100, 500, 1000}, 77);
    REQUIRE(plan.train_subsets.size() == 3);

    // strict nesting by set inclusion
    for (size_t i = 1; i < plan.train_subsets.size(); ++i) {
        const auto& smaller = plan.train_subsets[i - 1].second;
        std::set<std::string> larger(plan.train_subsets[i].second.begin(),
                                     plan.train_subsets[i].second.end());
        REQUIRE(smaller.size() < larger.size());
        for (const auto& id : smaller) REQUIRE(larger.count(id) == 1);
    }

    const RatioReport report = ratio_report(plan, pool);
    for (const auto& row : report.rows) {
        if (row.subset_label == "1000") REQUIRE(std::fabs(row.deviation_pp) <= 0.1);
    }
}

TEST_CASE("criterion 06: tiling partitions 1000 random images exactly") {
    rng::Stream noise(2026, 0x711E5, 0);
    for (int n = 0; n < 1000; ++n) {
        GreyImage8 img = GreyImage8::allocate(1024, 1024);
        for (auto& px : img.pixels) px = static_cast<uint8_t>(noise.next_u32() & 0xFF);
        const GreyTileSet set = tile16(img);
        REQUIRE(set.tiles.size() == 16);
        for (const auto& t : set.tiles) {
            REQUIRE(t.width == 256);
            REQUIRE(t.height == 256);
        }
        REQUIRE(reassemble(set) == img);
    }
}

TEST_CASE("criterion 07: grey conversion matches the formula on a million triples") {
    // full grey axis
    for (int v = 0; v < 256; ++v) {
        RgbImage8 px = RgbImage8::allocate(1, 1);
        px.r[0] = px.g[0] = px.b[0] = static_cast<uint8_t>(v);
        const double direct = 0.2989 * v + 0.5870 * v + 0.1140 * v;
        const int expected = std::min(255, static_cast<int>(std::floor(direct + 0.5)));
        REQUIRE(to_grey(px).pixels[0] == expected);
    }
    // sampled triples
    rng::Stream s(424242, 0x6E7, 0);
    RgbImage8 img = RgbImage8::allocate(1000, 1000);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        img.r[i] = static_cast<uint8_t>(s.next_u32() & 0xFF);
        img.g[i] = static_cast<uint8_t>(s.next_u32() & 0xFF);
        img.b[i] = static_cast<uint8_t>(s.next_u32() & 0xFF);
    }
    const GreyImage8 grey = to_grey(img);
    size_t mismatches = 0;
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        const double direct = 0.2989 * img.r[i] + 0.5870 * img.g[i] + 0.1140 * img.b[i];
        const int expected = std::min(255, static_cast<int>(std::floor(direct + 0.5)));
        if (grey.pixels[i] != expected) ++mismatches;
    }
    REQUIRE(mismatches == 0);
}

TEST_CASE("criterion 08: sampled parameters match their distributions") {
    const int n = 100000;
    int fast = 0, nearest = 0, bicubic = 0, bilinear = 0, mc = 0;
    for (int i = 0; i < n; ++i) {
        const DevRecipe r =
            sample_recipe({20260810, "dist_" + std::to_string(i)}, Profile::Learning);
        fast += r.demosaic == DemosaicMethod::Fast;
        nearest += r.resize_kernel == ResizeKernel::Nearest;
        bicubic += r.resize_kernel == ResizeKernel::Bicubic;
        bilinear += r.resize_kernel == ResizeKernel::Bilinear;
        mc += r.microcontrast_enabled;
    }
    REQUIRE(std::fabs(fast / double(n) - 0.35) < 0.01);
    REQUIRE(std::fabs(nearest / double(n) - 0.20) < 0.01);
    REQUIRE(std::fabs(bicubic / double(n) - 0.50) < 0.01);
    REQUIRE(std::fabs(bilinear / double(n) - 0.30) < 0.01);
    REQUIRE(std::fabs(mc / double(n) - 0.50) < 0.01);

    const int m = 1000000;
    rng::Stream gi(20260810, 0x1001, 0);
    double intensity_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        intensity_sum += sample_gamma_scaled(4.0, 10.0, 0.0, 1e18, gi);  // pre-clamp law
    }
    REQUIRE(std::fabs(intensity_sum / m - 40.0) < 0.4);

    rng::Stream gs(20260810, 0x1002, 0);
    double strength_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        strength_sum += sample_gamma_scaled(1.0, 50.0, 0.0, 1e18, gs);
    }
    REQUIRE(std::fabs(strength_sum / m - 50.0) < 0.5);
}

TEST_CASE("criterion 09: development output is byte-identical across worker counts") {
    const auto t0 = std::chrono::steady_clock::now();

    // 64-image fixture tree across all sources and patterns
    const fs::path input = fs::temp_directory_path() / "lssd_accept_dev_in";
    if (!fs::exists(input / "alaska2")) {
        fs::remove_all(input);
        const char* dirs[4] = {"alaska2", "boss", "raise", "dresden"};
        const BayerPattern patterns[4] = {BayerPattern::RGGB, BayerPattern::BGGR,
                                          BayerPattern::GRBG, BayerPattern::GBRG};
        uint64_t key = 9000;
        for (int i = 0; i < 64; ++i) {
            const int w = 1024 + 64 * (i % 4);
            const int h = 1024 + 32 * (i % 5);
            const fs::path dir = input / dirs[i % 4];
            fs::create_directories(dir);
            char stem[32];
            std::snprintf(stem, sizeof(stem), "img_%03d.pgm", i);
            write_cfa(testfix::synthetic_mosaic(w, h, patterns[i % 4], key++), dir / stem);
        }
    }

    batch::RunConfig config;
    config.master_seed = 20260810;
    config.profile = Profile::Learning;
    config.input_root = input;

    std::map<std::string, std::string> reference;
    for (int workers : {1, 4, 16}) {
        config.workers = workers;
        config.output_root =
            fs::temp_directory_path() / ("lssd_accept_dev_w" + std::to_string(workers));
        fs::remove_all(config.output_root);
        std::ostringstream log;
        REQUIRE(batch::cmd_develop(config, log) == batch::kExitOk);
        const auto digests = hash_tree(config.output_root);
        REQUIRE(digests.size() == 64 * 32 + 2);
        if (reference.empty()) {
            reference = digests;
        } else {
            REQUIRE(digests == reference);
        }
    }
    CHECK(seconds_since(t0) < 120.0);
}

TEST_CASE("criterion 10: reference decoder agrees pixel-exactly on 50 tiles") {
    double min_psnr = 1e9;
    for (uint64_t key = 0; key < 50; ++key) {
        const GreyImage8 tile = testfix::textured_tile(1000 + key);
        const jpeg::Bytes bytes = jpeg::encode_jpeg(tile, 75);

        std::vector<uint8_t> ref;
        int w = 0, h = 0, comps = 0;
        REQUIRE(reference_decode(bytes, ref, w, h, comps));
        REQUIRE(w == 256);
        REQUIRE(h == 256);
        REQUIRE(comps == 1);

        const GreyImage8 mine = jpeg::decode_jpeg(bytes).grey();
        REQUIRE(ref.size() == mine.pixels.size());
        size_t diffs = 0;
        for (size_t i = 0; i < ref.size(); ++i) diffs += ref[i] != mine.pixels[i];
        REQUIRE(diffs == 0);

        double mse = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) {
            const double d = double(mine.pixels[i]) - double(tile.pixels[i]);
            mse += d * d;
        }
        mse /= static_cast<double>(ref.size());
        min_psnr = std::min(min_psnr, 10.0 * std::log10(255.0 * 255.0 / mse));
    }
    REQUIRE(min_psnr > 30.0);
}

TEST_CASE("criterion 11: storage accounting reproduces the published magnitudes") {
    // one exported tile: array payload of exactly 256*256*8 bytes
    const fs::path dir = fs::temp_directory_path() / "lssd_accept_storage";
    fs::create_directories(dir);
    const jpeg::Bytes tile = jpeg::encode_jpeg(testfix::textured_tile(77), 75);
    const fs::path mat_path = dir / "tile.mat";
    export_decompressed(tile, mat_path);
    const uintmax_t file_size = fs::file_size(mat_path);
    const uintmax_t header_overhead = 128 + 8 + 16 + 16 + 16 + 8;
    REQUIRE(file_size - header_overhead == 524288);

    // four million decompressed tiles extrapolate to about 2.10 TB
    StorageUnits units;
    StorageCounts mat_only;
    mat_only.mat_grey = 2'000'000;
    mat_only.mat_grey_stego = 2'000'000;
    const StorageReport mat_report = estimate_storage(mat_only, units);
    REQUIRE(static_cast<double>(mat_report.total_bytes) / 1e12 ==
            Catch::Approx(2.10).margin(0.01));
    REQUIRE(mat_report.total_bytes > 2'000'000'000'000ull);  // "more than 2 TB"

    // proportional structure survives scaling: same shares at 1/1000 counts
    units.raw_bytes = 2ull * 3000 * 5000;  // 16-bit mosaic of the typical size
    units.jpeg_grey_bytes = tile.size();
    units.jpeg_colour_bytes =
        jpeg::encode_jpeg(testfix::textured_colour_tile(78), 75).size();

    StorageCounts full;
    full.raw = 127420;
    full.jpeg_colour = 2'000'000;
    full.jpeg_grey = 2'000'000;
    full.jpeg_grey_stego = 2'000'000;
    full.mat_grey = 2'000'000;
    full.mat_grey_stego = 2'000'000;
    StorageCounts fixture;
    fixture.raw = 127;
    fixture.jpeg_colour = 2000;
    fixture.jpeg_grey = 2000;
    fixture.jpeg_grey_stego = 2000;
    fixture.mat_grey = 2000;
    fixture.mat_grey_stego = 2000;

    const StorageReport full_report = estimate_storage(full, units);
    const StorageReport fixture_report = estimate_storage(fixture, units);
    REQUIRE(full_report.lines.size() == fixture_report.lines.size());
    for (size_t i = 0; i < full_report.lines.size(); ++i) {
        const double share_full = static_cast<double>(full_report.lines[i].total_bytes) /
                                  static_cast<double>(full_report.total_bytes);
        const double share_fixture =
            static_cast<double>(fixture_report.lines[i].total_bytes) /
            static_cast<double>(fixture_report.total_bytes);
        REQUIRE(share_fixture == Catch::Approx(share_full).margin(0.10 * share_full + 1e-12));
    }
    // the projected corpus is a multi-terabyte figure dominated by MAT + RAW
    REQUIRE(full_report.total_bytes > 5'000'000'000'000ull);
}

TEST_CASE("criterion 12: unrounded decode rounds to the integer decode everywhere") {
    for (uint64_t key = 0; key < 10; ++key) {
        const GreyImage8 tile =
            key == 0 ? GreyImage8::allocate(256, 256, 128) : testfix::textured_tile(2000 + key);
        const jpeg::Bytes bytes = jpeg::encode_jpeg(tile, 75);
        const GreyImage8 dec = jpeg::decode_jpeg(bytes).grey();
        const jpeg::UnroundedImage u = jpeg::decode_unrounded(bytes);
        REQUIRE(u.values.size() == dec.pixels.size());
        for (size_t i = 0; i < u.values.size(); ++i) {
            const double rounded = std::clamp(std::floor(u.values[i] + 0.5), 0.0, 255.0);
            REQUIRE(static_cast<int>(rounded) == dec.pixels[i]);
        }
    }
}
