#include <catch2/catch_amalgamated.hpp>

#include "lssd/sha256.hpp"

using namespace lssd;

TEST_CASE("sha256 FIPS vectors") {
    Sha256 h;
    CHECK(Sha256::to_hex(h.finish()) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    Sha256 abc;
    abc.update(std::string("abc"));
    CHECK(Sha256::to_hex(abc.finish()) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    Sha256 two;
    two.update(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"));
    CHECK(Sha256::to_hex(two.finish()) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 incremental updates match one-shot") {
    std::vector<uint8_t> data(1000);
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 7 + 3);

    const std::string oneshot = Sha256::hex_digest(data);

    Sha256 h;
    size_t pos = 0;
    for (size_t chunk : {1ul, 63ul, 64ul, 65ul, 500ul, 307ul}) {
        const size_t take = std::min(chunk, data.size() - pos);
        h.update(std::span<const uint8_t>(data.data() + pos, take));
        pos += take;
    }
    REQUIRE(pos == data.size());
    CHECK(Sha256::to_hex(h.finish()) == oneshot);
}
