#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace sdrturbo {

// Stream tags for deriving independent generators from one master seed.
// Channel, noise, interleaver and synthetic-prior draws never share a stream.
enum class StreamId : std::uint64_t {
    Channel = 0x11,
    Noise = 0x22,
    Interleaver = 0x33,
    ExitPrior = 0x44,
    Message = 0x55,
    Code = 0x66,
};

// Self-contained xoshiro256++ generator with splitmix64 seeding.
// The standard library's distributions are implementation-defined, so all
// sampling (uniform, gaussian, bounded ints) is spelled out here to keep
// simulation output reproducible byte-for-byte across toolchains.
class Prng {
public:
    explicit Prng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    // Derives a child generator from a master seed and a path of tags,
    // e.g. derive(master, {frame_index, tag(StreamId::Noise)}).
    static Prng derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = master;
        for (std::uint64_t tag : path) {
            std::uint64_t t = tag;
            h ^= splitmix64(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return Prng(h);
    }

    static constexpr std::uint64_t tag(StreamId id) { return static_cast<std::uint64_t>(id); }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), bias-free via rejection.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return draw % bound;
    }

    // Standard normal via Box-Muller (cosine branch only).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool coin() { return (next_u64() >> 63) != 0; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
};

}  // namespace sdrturbo
