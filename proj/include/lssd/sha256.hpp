#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace lssd {

/// Incremental SHA-256 (FIPS 180-4), used for content digests in manifests.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        state_ = {0x6A09E667u, 0xBB67AE85u, 0x3C6EF372u, 0xA54FF53Au,
                  0x510E527Fu, 0x9B05688Cu, 0x1F83D9ABu, 0x5BE0CD19u};
        total_ = 0;
        buf_len_ = 0;
    }

    void update(std::span<const uint8_t> data) {
        total_ += data.size();
        size_t off = 0;
        if (buf_len_ > 0) {
            const size_t take = std::min(data.size(), size_t{64} - buf_len_);
            std::memcpy(buf_.data() + buf_len_, data.data(), take);
            buf_len_ += take;
            off = take;
            if (buf_len_ == 64) {
                compress(buf_.data());
                buf_len_ = 0;
            }
        }
        while (off + 64 <= data.size()) {
            compress(data.data() + off);
            off += 64;
        }
        if (off < data.size()) {
            std::memcpy(buf_.data(), data.data() + off, data.size() - off);
            buf_len_ = data.size() - off;
        }
    }

    void update(const std::string& s) {
        update(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
    }

    std::array<uint8_t, 32> finish() {
        const uint64_t bit_len = total_ * 8;
        uint8_t pad[72] = {0x80};
        const size_t pad_len = (buf_len_ < 56) ? (56 - buf_len_) : (120 - buf_len_);
        update(std::span<const uint8_t>(pad, pad_len));
        uint8_t len_bytes[8];
        for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<uint8_t>(bit_len >> (56 - 8 * i));
        total_ -= pad_len;  // length padding is not message data
        update(std::span<const uint8_t>(len_bytes, 8));

        std::array<uint8_t, 32> out;
        for (int i = 0; i < 8; ++i) {
            out[static_cast<size_t>(4 * i)] = static_cast<uint8_t>(state_[static_cast<size_t>(i)] >> 24);
            out[static_cast<size_t>(4 * i + 1)] = static_cast<uint8_t>(state_[static_cast<size_t>(i)] >> 16);
            out[static_cast<size_t>(4 * i + 2)] = static_cast<uint8_t>(state_[static_cast<size_t>(i)] >> 8);
            out[static_cast<size_t>(4 * i + 3)] = static_cast<uint8_t>(state_[static_cast<size_t>(i)]);
        }
        return out;
    }

    static std::string hex_digest(std::span<const uint8_t> data) {
        Sha256 h;
        h.update(data);
        return to_hex(h.finish());
    }

    static std::string to_hex(const std::array<uint8_t, 32>& digest) {
        static const char* hexc = "0123456789abcdef";
        std::string s;
        s.reserve(64);
        for (uint8_t b : digest) {
            s.push_back(hexc[b >> 4]);
            s.push_back(hexc[b & 0x0F]);
        }
        return s;
    }

private:
    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress(const uint8_t* chunk) {
        static constexpr std::array<uint32_t, 64> k = {
            0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4,
            0xAB1C5ED5, 0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE,
            0x9BDC06A7, 0xC19BF174, 0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F,
            0x4A7484AA, 0x5CB0A9DC, 0x76F988DA, 0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7,
            0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967, 0x27B70A85, 0x2E1B2138, 0x4D2C6DFC,
            0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85, 0xA2BFE8A1, 0xA81A664B,
            0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070, 0x19A4C116,
            0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
            0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7,
            0xC67178F2};
        uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (static_cast<uint32_t>(chunk[4 * i]) << 24) |
                   (static_cast<uint32_t>(chunk[4 * i + 1]) << 16) |
                   (static_cast<uint32_t>(chunk[4 * i + 2]) << 8) |
                   static_cast<uint32_t>(chunk[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            const uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            const uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const uint32_t ch = (e & f) ^ (~e & g);
            const uint32_t t1 = h + s1 + ch + k[static_cast<size_t>(i)] + w[i];
            const uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const uint32_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<uint32_t, 8> state_{};
    uint64_t total_ = 0;
    std::array<uint8_t, 64> buf_{};
    size_t buf_len_ = 0;
};

}  // namespace lssd
