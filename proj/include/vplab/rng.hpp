#pragma once

#include <array>
#include <cstdint>

namespace vplab {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent draw families. Part of the counter, so the same
/// (replica, i, j) in two streams never shares a raw block.
enum class Stream : std::uint32_t {
    entries = 1,
    graph = 2,
    norm = 3,
    profile = 4,
    falsify = 5,
    calibration = 6,
    gof_floor = 7,
};

/// Stateless counter-based generator keyed by a 64-bit experiment seed.
/// Every draw is a pure function of (seed, a, b, c, stream), which makes
/// replicas reproducible and independent of scheduling order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::array<std::uint32_t, 4> block(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                       Stream stream) const;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint32_t a, std::uint32_t b, std::uint32_t c, Stream stream) const;

    /// Standard Gaussian via Box-Muller on a single block.
    double gaussian(std::uint32_t a, std::uint32_t b, std::uint32_t c, Stream stream) const;

private:
    std::uint64_t seed_;
};

}  // namespace vplab
