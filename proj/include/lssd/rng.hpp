#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace lssd::rng {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A keyed bijection on a 128-bit counter: any (counter, key) pair can be
// evaluated independently, which is what makes per-image streams
// order-independent and reproducible across machines and thread counts.
struct Philox4x32 {
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
            const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
            const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
            const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x00000100000001B3ull;
    }
    return h;
}

/// One logical random stream. Streams are identified by
/// (master_seed, stream_id, substream): the key is a splitmix64 mix of the
/// master seed and stream id, the counter carries the substream tag in its
/// upper words and a 64-bit draw position in its lower words. Distinct ids
/// or substreams therefore never share Philox blocks.
class Stream {
public:
    Stream(uint64_t master_seed, uint64_t stream_id, uint32_t substream = 0) {
        const uint64_t k = splitmix64(splitmix64(master_seed) ^ stream_id);
        const uint64_t p = splitmix64(k ^ 0x6C62272E07BB0142ull);
        key_ = {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
        prefix_ = {static_cast<uint32_t>(p) ^ substream, static_cast<uint32_t>(p >> 32)};
    }

    /// Stream for a named item, e.g. an image id.
    static Stream for_id(uint64_t master_seed, std::string_view id, uint32_t substream = 0) {
        return Stream(master_seed, fnv1a64(id), substream);
    }

    uint32_t next_u32() {
        if (buf_pos_ == 4) {
            buf_ = Philox4x32::block({static_cast<uint32_t>(pos_), static_cast<uint32_t>(pos_ >> 32),
                                      prefix_[0], prefix_[1]},
                                     key_);
            ++pos_;
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    uint64_t next_u64() {
        const uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1), never exactly 0 or 1; safe under log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). Rejection keeps it exactly uniform.
    uint32_t uniform_int(uint32_t n) {
        const uint32_t limit = n * (0xFFFFFFFFu / n);  // multiple of n
        uint32_t v = next_u32();
        while (v >= limit) v = next_u32();
        return v % n;
    }

    /// Standard normal via Box-Muller (two uniforms per draw).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    /// Gamma(shape, scale 1) via Marsaglia-Tsang; shape < 1 uses the boost
    /// Gamma(a) = Gamma(a+1) * U^(1/a).
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::array<uint32_t, 2> key_{};
    std::array<uint32_t, 2> prefix_{};
    uint64_t pos_ = 0;
    std::array<uint32_t, 4> buf_{};
    int buf_pos_ = 4;
};

}  // namespace lssd::rng
