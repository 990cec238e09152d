#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace chaoslab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3", SC'11). Stateless: output depends only on
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Purpose tags that keep independent uses of one seed apart.
enum class Stream : std::uint32_t {
    dynamics = 0,
    initial = 1,
    reference = 2,
    sampler = 3,
    ensemble = 4,
    auxiliary = 5,
};

/// Counter-based normal/uniform source keyed by (seed, replica, stream).
///
/// Variate `index` at `step` is a pure function of
/// (seed, replica, stream, step, index), so results do not depend on the
/// order in which particles or replicas are processed. Particle i in
/// dimension d uses index i * dim + j.
class KeyedNormal {
public:
    KeyedNormal(std::uint64_t seed, std::uint64_t replica, Stream stream = Stream::dynamics);

    /// Fill out[0..size) with the standard normals of `step`.
    void fill(std::uint64_t step, std::span<double> out) const;

    double normal(std::uint64_t step, std::uint64_t index) const;

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t step, std::uint64_t index) const;

private:
    std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint64_t pair) const;

    std::array<std::uint32_t, 2> key_;
    std::uint32_t replica_lo_;
    std::uint32_t tag_;
};

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace chaoslab
