#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>

#include "lssd/matio.hpp"
#include "lssd/rng.hpp"

using namespace lssd;
namespace fs = std::filesystem;

namespace {
fs::path temp_path(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "lssd_matio_test";
    fs::create_directories(dir);
    return dir / name;
}
}  // namespace

TEST_CASE("a 256x256 array carries exactly 524288 payload bytes") {
    mat::Array a;
    a.rows = 256;
    a.cols = 256;
    a.name = "im";
    a.values.assign(256 * 256, 128.0);
    const fs::path path = temp_path("tile.mat");
    mat::write_array(a, path);

    // 128 header + 8 matrix tag + 16 flags + 16 dims + 16 name + 8 data tag
    CHECK(fs::file_size(path) == 128 + 8 + 16 + 16 + 16 + 8 + 524288);

    const mat::Array back = mat::read_array(path);
    CHECK(back.rows == 256);
    CHECK(back.cols == 256);
    CHECK(back.name == "im");
    for (double v : back.values) REQUIRE(v == 128.0);
}

TEST_CASE("round trip preserves doubles to the bit") {
    mat::Array a;
    a.rows = 33;
    a.cols = 17;
    a.name = "im";
    rng::Stream s(3, 0x3A7, 0);
    for (int i = 0; i < 33 * 17; ++i) a.values.push_back(s.uniform() * 300.0 - 50.0);

    const fs::path path = temp_path("random.mat");
    mat::write_array(a, path);
    const mat::Array back = mat::read_array(path);
    REQUIRE(back.values.size() == a.values.size());
    CHECK(std::memcmp(back.values.data(), a.values.data(), a.values.size() * 8) == 0);
}

TEST_CASE("row/column order survives the column-major file layout") {
    mat::Array a;
    a.rows = 2;
    a.cols = 3;
    a.name = "im";
    a.values = {1, 2, 3, 4, 5, 6};  // row-major
    const fs::path path = temp_path("order.mat");
    mat::write_array(a, path);
    const mat::Array back = mat::read_array(path);
    CHECK(back.at(0, 0) == 1);
    CHECK(back.at(0, 2) == 3);
    CHECK(back.at(1, 0) == 4);
    CHECK(back.at(1, 2) == 6);
}

TEST_CASE("writer validates its inputs") {
    mat::Array bad;
    bad.rows = 2;
    bad.cols = 2;
    bad.name = "im";
    bad.values = {1.0};
    CHECK_THROWS_AS(mat::write_array(bad, temp_path("bad.mat")), Error);
}
