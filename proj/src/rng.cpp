#include "chaoslab/rng.hpp"

#include <cmath>
#include <numbers>

namespace chaoslab {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

// 53-bit uniform on (0,1) from two 32-bit words.
inline double to_open_unit(std::uint32_t a, std::uint32_t b)
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

KeyedNormal::KeyedNormal(std::uint64_t seed, std::uint64_t replica, Stream stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      replica_lo_(static_cast<std::uint32_t>(replica)),
      tag_((static_cast<std::uint32_t>(stream) << 24) ^
           static_cast<std::uint32_t>((replica >> 32) & 0xFFFFFFu))
{
}

std::array<std::uint32_t, 4> KeyedNormal::block(std::uint64_t step, std::uint64_t pair) const
{
    // step and pair above 2^32 are folded into the tag word
    const std::uint32_t hi = static_cast<std::uint32_t>((step >> 32) * 0x9E3779B9u) ^
                             static_cast<std::uint32_t>((pair >> 32) * 0x85EBCA6Bu);
    return philox4x32({static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(step),
                       replica_lo_, tag_ ^ hi},
                      key_);
}

void KeyedNormal::fill(std::uint64_t step, std::span<double> out) const
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const std::size_t size = out.size();
    for (std::size_t pair = 0; 2 * pair < size; ++pair) {
        const auto w = block(step, pair);
        const double r = std::sqrt(-2.0 * std::log(to_open_unit(w[0], w[1])));
        const double theta = two_pi * to_open_unit(w[2], w[3]);
        out[2 * pair] = r * std::cos(theta);
        if (2 * pair + 1 < size) out[2 * pair + 1] = r * std::sin(theta);
    }
}

double KeyedNormal::normal(std::uint64_t step, std::uint64_t index) const
{
    const auto w = block(step, index / 2);
    const double r = std::sqrt(-2.0 * std::log(to_open_unit(w[0], w[1])));
    const double theta = 2.0 * std::numbers::pi * to_open_unit(w[2], w[3]);
    return (index % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

double KeyedNormal::uniform(std::uint64_t step, std::uint64_t index) const
{
    // separate counter space from normals: top bit of the pair word
    const auto w = block(step, (index / 2) | (1ull << 31));
    return (index % 2 == 0) ? to_open_unit(w[0], w[1]) : to_open_unit(w[2], w[3]);
}

}  // namespace chaoslab
